"""⚙️ Server information resource."""

import time

from src.config import APP_NAME, DESCRIPTION, VERSION
from src.models import ServerInfo

CAPABILITIES = [
    "file_ingestion",
    "stop_move_segmentation",
    "region_annotation",
    "space_time_paths",
    "grid_index",
    "trajectory_queries",
    "snapshots",
]


def get_server_info(start_time: float, tools_count: int) -> ServerInfo:
    """Static description of the server plus its uptime."""
    return ServerInfo(
        name=APP_NAME,
        version=VERSION,
        description=DESCRIPTION,
        capabilities=list(CAPABILITIES),
        tools_count=tools_count,
        uptime=time.time() - start_time,
    )
