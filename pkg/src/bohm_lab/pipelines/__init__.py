"""LangGraph pipelines built on the numerical core."""
