# FinQuakes - Agents
