# FinQuakes - Utilities
