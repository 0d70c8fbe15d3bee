"""
Dashboard Components
Charts and cards for inspecting filtering runs
"""

__version__ = "1.0.0"
