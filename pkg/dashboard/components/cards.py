"""
Metric Cards Component
Chamfer distance and MSE before and after filtering
"""
import streamlit as st

from evaluation.metrics import MetricResult


def metric_deltas(before: MetricResult, after: MetricResult) -> dict:
    """Scaled values and relative change of each metric"""
    scaled_before, scaled_after = before.scaled(), after.scaled()
    deltas = {}
    for name in ('chamfer', 'mse'):
        old, new = scaled_before[name], scaled_after[name]
        change = (new - old) / old * 100 if old > 0 else 0.0
        deltas[name] = {'before': old, 'after': new, 'change_pct': change}
    return deltas


def render_metric_cards(before: MetricResult, after: MetricResult):
    """
    Render CD / MSE cards for the noisy and filtered clouds

    Args:
        before: Metrics of the noisy cloud against the clean one
        after: Metrics of the filtered cloud against the clean one
    """
    deltas = metric_deltas(before, after)
    cols = st.columns(4)

    with cols[0]:
        st.metric('📏 CD noisy (×1e-5)', f"{deltas['chamfer']['before']:.3f}")
    with cols[1]:
        st.metric('📏 CD filtered (×1e-5)', f"{deltas['chamfer']['after']:.3f}",
                  delta=f"{deltas['chamfer']['change_pct']:+.1f}%", delta_color='inverse')
    with cols[2]:
        st.metric('🎯 MSE noisy (×1e-3)', f"{deltas['mse']['before']:.3f}")
    with cols[3]:
        st.metric('🎯 MSE filtered (×1e-3)', f"{deltas['mse']['after']:.3f}",
                  delta=f"{deltas['mse']['change_pct']:+.1f}%", delta_color='inverse')
