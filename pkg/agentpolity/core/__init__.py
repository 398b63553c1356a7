"""Simulation core: domain model, rate laws, engine and artifacts."""
