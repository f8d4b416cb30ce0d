"""🛰️ Trajectory MCP - Core Package.

In-memory moving-object trajectory engine served over the Model Context
Protocol and a batch CLI.
"""

__version__ = "0.1.0"
__description__ = "🛰️ Moving-object trajectory engine with a spatio-temporal query language"
