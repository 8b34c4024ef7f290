"""Relativistic Friedrichs model in point-form dynamics."""
