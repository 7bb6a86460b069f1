"""FastAPI service wrapping the laboratory; see app.create_app."""
