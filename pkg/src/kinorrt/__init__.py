"""Kinodynamic planning for omnidirectional robots among moving obstacles."""
