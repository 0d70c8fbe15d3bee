"""
Charts Component
Plotly point-cloud renderings and run charts with dark theme
"""
import altair as alt
import numpy as np
import pandas as pd
import plotly.graph_objects as go

from dashboard.config import CHART_CONFIG, COLORS, POINT_COLORS, STEP_COLORS
from filtering.pipeline import FilterReport
from filtering.similarity import SimilarSet
from geometry.cloud import PointCloud


def get_chart_layout(title=""):
    """Get standard 3D chart layout with dark theme"""
    axis = {'gridcolor': COLORS['border'], 'showbackground': False, 'zeroline': False}
    return {
        'template': 'plotly_dark',
        'paper_bgcolor': 'rgba(0,0,0,0)',
        'plot_bgcolor': 'rgba(0,0,0,0)',
        'title': {
            'text': title,
            'font': {
                'size': 18,
                'color': COLORS['text_primary'],
                'family': CHART_CONFIG['font_family']
            }
        },
        'font': {
            'family': CHART_CONFIG['font_family'],
            'size': CHART_CONFIG['font_size'],
            'color': COLORS['text_secondary']
        },
        'scene': {'xaxis': axis, 'yaxis': axis, 'zaxis': axis, 'aspectmode': 'data'},
        'margin': CHART_CONFIG['margin'],
        'height': CHART_CONFIG['height']
    }


def _display_points(points: np.ndarray) -> np.ndarray:
    # Evenly strided subset above max_points
    step = max(1, int(np.ceil(len(points) / CHART_CONFIG['max_points'])))
    return points[::step]


def _scatter_trace(points, name, color, size=None):
    return go.Scatter3d(
        x=points[:, 0],
        y=points[:, 1],
        z=points[:, 2],
        mode='markers',
        name=name,
        marker=dict(size=size or CHART_CONFIG['marker_size'], color=color)
    )


def cloud_scatter(cloud: PointCloud, title: str = "", color: str = POINT_COLORS['filtered']):
    """3D scatter of a point cloud"""
    fig = go.Figure()
    fig.add_trace(_scatter_trace(_display_points(cloud.points), title or 'points', color))
    fig.update_layout(**get_chart_layout(title))
    return fig


def similar_set_scatter(cloud: PointCloud, similar: SimilarSet):
    """
    Similar set of one point drawn over its cloud

    Args:
        cloud: Cloud the set was searched in
        similar: Similar set to highlight

    Returns:
        go.Figure: Grey cloud, red members, blue query
    """
    members = similar.member_indices[similar.member_indices != similar.query_index]
    fig = go.Figure()
    fig.add_trace(_scatter_trace(_display_points(cloud.points), 'cloud', POINT_COLORS['background']))
    fig.add_trace(_scatter_trace(cloud.points[members], 'similar patches',
                                 POINT_COLORS['member'], CHART_CONFIG['marker_size'] + 2))
    fig.add_trace(_scatter_trace(cloud.points[[similar.query_index]], 'query',
                                 POINT_COLORS['query'], CHART_CONFIG['marker_size'] + 6))
    fig.update_layout(**get_chart_layout(f'Similar set of point {similar.query_index} '
                                         f'({len(similar)} members)'))
    return fig


def runtime_chart(report: FilterReport):
    """Stacked bars of step 1 and step 2 seconds per iteration"""
    frame = report.to_frame()
    fig = go.Figure()
    fig.add_trace(go.Bar(x=frame['iteration'], y=frame['step1'], name='Step 1 (similar patches)',
                         marker_color=STEP_COLORS['step1']))
    fig.add_trace(go.Bar(x=frame['iteration'], y=frame['step2'], name='Step 2 (position update)',
                         marker_color=STEP_COLORS['step2']))

    layout = get_chart_layout(f'Runtime per iteration (scheme {report.scheme})')
    layout.pop('scene')
    fig.update_layout(**layout)
    fig.update_layout(barmode='stack', xaxis_title='Iteration', yaxis_title='Seconds',
                      xaxis={'dtick': 1})
    return fig


def similar_size_histogram(report: FilterReport):
    """Histogram of similar-set sizes from the run's search"""
    sizes = report.similar_sizes if report.similar_sizes is not None else np.empty(0, dtype=int)
    data = pd.DataFrame({'size': np.asarray(sizes, dtype=int)})
    return alt.Chart(data).mark_bar(color=COLORS['primary']).encode(
        x=alt.X('size:Q', bin=alt.Bin(maxbins=40), title='Similar patches per point'),
        y=alt.Y('count():Q', title='Points')
    ).properties(
        title='Similar-set sizes',
        height=CHART_CONFIG['height'] // 2
    )
