# 💬 Prompts - query language and troubleshooting guides
