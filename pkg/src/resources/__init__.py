# 📁 Resources - MCP resource handlers for engine status and settings
