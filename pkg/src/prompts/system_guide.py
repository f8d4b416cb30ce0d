"""🎯 Query language guide prompt."""

from src.config import APP_NAME, VERSION


def get_system_prompt() -> str:
    """Workflow, grammar and one example per query source."""
    return f"""
🛰️ {APP_NAME} v{VERSION}

You are connected to an in-memory trajectory engine. Typical workflow:

1. 📥 load_data(kind="devices", path=...)      devices first, so points can reference them
2. 📥 load_data(kind="regions", path=...)      regions of interest, one JSON record per line
3. 📥 load_data(kind="points", path=...)       object_id,t,x,y,device_id
4. 📥 load_data(kind="activities", path=...)   anchored to events automatically
5. ✂️ segment(eps=50, tau=600)                 stops and moves
6. 🏷️ annotate()                               label episodes with regions
7. 🔎 run_query(dsl="...")

**Grammar**
```
query  = source [where pred {{and pred}}] [group by field] [select count | select field {{, field}}]
source = raw | stops | moves | semantic | roi-visits | stpath | devices
pred   = field op literal | field like "pattern%" | intersects(layer "category")
       | within(region "name") | window(x_min, x_max, y_min, y_max, t_begin, t_end)
op     = = | != | < | <= | > | >=
```
Durations carry a unit: `600s`, `10min`, `2h`. Times are epoch seconds.

**Fields per source**
- raw: object, t, x, y (+ place with intersects)
- stops / moves: object, t_begin, t_end, duration, x, y (+ place with intersects)
- semantic: object, t_begin, t_end, duration, x, y, place, category, role
- roi-visits: object, region, category, t_begin, t_end, via_descendant
- stpath: object, t_begin, t_end, activity_kind, label, x, y (+ place with intersects)
- devices: device, kind, reliability, t, region

**Examples**
- `raw where object = "MO" and intersects(layer "road")`
- `stops where duration > 10min`
- `semantic where role = "stop" and place = "school" select object, t_begin, duration`
- `roi-visits where category = "commercial" group by region select count`
- `stpath where object = "MO"`
- `devices where region like "%airport%"`

📊 **Resources**
- server://info - server information
- store://health - revision, entity counts, index freshness
- config://settings - safe configuration values
"""
