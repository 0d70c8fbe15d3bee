"""
Configuration file for the filtering dashboard
Centralized settings and constants
"""

# Design System Colors
COLORS = {
    'primary': '#2196F3',
    'secondary': '#00BCD4',
    'success': '#4CAF50',
    'warning': '#FF9800',
    'danger': '#F44336',
    'muted': '#9E9E9E',
    'text_primary': '#FFFFFF',
    'text_secondary': '#B0BEC5',
    'border': 'rgba(255, 255, 255, 0.1)'
}

# Point colors per role
POINT_COLORS = {
    'noisy': '#FF9800',
    'filtered': '#2196F3',
    'clean': '#4CAF50',
    'background': '#9E9E9E',
    'member': '#F44336',
    'query': '#2196F3'
}

# Step colors in the runtime chart
STEP_COLORS = {
    'step1': '#9C27B0',
    'step2': '#00BCD4'
}

APP_CONFIG = {
    'name': 'NLPF',
    'version': '1.0.0',
    'tagline': 'Non-Local Point-Cloud Filtering'
}

# Chart Configuration
CHART_CONFIG = {
    'height': 500,
    'margin': {'l': 10, 'r': 10, 't': 50, 'b': 10},
    'font_family': 'Inter, system-ui, sans-serif',
    'font_size': 12,
    'marker_size': 2,
    'max_points': 20000
}

# Sidebar defaults
DEMO_DEFAULTS = {
    'model': 'cube',
    'points': 4000,
    'noise_level': 0.005,
    'seed': 0
}
