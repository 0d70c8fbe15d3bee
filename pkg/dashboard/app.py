"""
NLPF Inspection Dashboard
Noise, filter and inspect synthetic point clouds
"""
import streamlit as st
import sys
from pathlib import Path

# Add parent directory to path
sys.path.append(str(Path(__file__).parent.parent))

from dashboard.components.cards import render_metric_cards
from dashboard.components.charts import (
    cloud_scatter, runtime_chart, similar_set_scatter, similar_size_histogram
)
from dashboard.config import APP_CONFIG, DEMO_DEFAULTS, POINT_COLORS
from evaluation.metrics import evaluate
from filtering.config import FILTER_DEFAULTS, FILTER_PRESETS, configure_logging
from filtering.pipeline import FilterParams, filter_cloud, scheme_advice
from filtering.rpca import DescriptorKind
from filtering.similarity import (
    SearchMode, build_descriptor_table, calibrate_theta, find_similar, find_similar_local,
)
from geometry.cloud import PointCloud, add_gaussian_noise, build_index
from geometry.synthetic import DEMO_MODELS, NOISE_LEVELS, load_model

configure_logging()

# Page configuration
st.set_page_config(
    page_title=f"{APP_CONFIG['name']} - {APP_CONFIG['tagline']}",
    page_icon="☁️",
    layout="wide",
    initial_sidebar_state="expanded"
)


@st.cache_data
def noisy_model(name, points, level, seed):
    clean = load_model(name, points, seed)
    return clean.points, add_gaussian_noise(clean, level, seed).points


@st.cache_data
def filtered_model(noisy_points, params_json):
    params = FilterParams.model_validate_json(params_json)
    filtered, report = filter_cloud(PointCloud(noisy_points), params)
    return filtered.points, report


@st.cache_resource
def descriptor_table(noisy_points, k, kind):
    return build_descriptor_table(PointCloud(noisy_points), k, kind=kind)


# ==================== SIDEBAR ====================
with st.sidebar:
    st.title(f"☁️ {APP_CONFIG['name']}")
    st.caption(APP_CONFIG['tagline'])

    st.subheader("Model")
    models = list(DEMO_MODELS)
    model = st.selectbox("Synthetic model", models, index=models.index(DEMO_DEFAULTS['model']))
    points = st.slider("Points", 1000, 20000, DEMO_DEFAULTS['points'], step=500)
    level = st.select_slider("Noise level (× bbox diagonal)", options=list(NOISE_LEVELS),
                             value=DEMO_DEFAULTS['noise_level'])
    seed = st.number_input("Seed", min_value=0, value=DEMO_DEFAULTS['seed'], step=1)

    st.subheader("Filter")
    preset = st.selectbox("Preset", ['custom'] + sorted(FILTER_PRESETS))
    base = FILTER_PRESETS.get(preset, FILTER_DEFAULTS)
    k = st.slider("K (patch size)", 10, 150, base['k'])
    theta = st.number_input("θ (similarity threshold)", min_value=1e-4, value=float(base['theta']),
                            format="%.4f")
    calibrate = st.checkbox("Calibrate θ from a target set size", value='set_size' in base)
    set_size = st.slider("Median similar-set size", 2, 200, base.get('set_size', 40),
                         disabled=not calibrate)
    descriptor = st.radio("Descriptor", [d.value for d in DescriptorKind], horizontal=True)
    search = st.radio("Search", [m.value for m in SearchMode], horizontal=True)
    radius_factor = st.slider("Local radius (× patch radius)", 1.0, 10.0,
                              float(FILTER_DEFAULTS['local_radius_factor']), step=0.5,
                              disabled=search != SearchMode.LOCAL.value)
    iterations = st.slider("Iterations", 1, 5, base['iterations'])
    scheme = st.radio("Scheme", [1, 2], index=[1, 2].index(base['scheme']), horizontal=True)
    st.info(f"💡 {scheme_advice()}")

    run = st.button("🚀 Run filter", type="primary", use_container_width=True)


# ==================== MAIN PAGE ====================
st.header("📊 Filtering Overview")

clean_points, noisy_points = noisy_model(model, points, level, int(seed))
clean, noisy = PointCloud(clean_points), PointCloud(noisy_points)

params = FilterParams(
    k=k,
    theta=theta,
    iterations=iterations,
    scheme=scheme,
    descriptor=descriptor,
    search=search,
    local_radius_factor=radius_factor,
    set_size=set_size if calibrate else None,
)
for message in params.range_warnings():
    st.warning(f"⚠️ {message}")

if run:
    st.session_state.params_json = params.model_dump_json()

if 'params_json' not in st.session_state:
    st.info("Pick a model and parameters, then run the filter.")
    st.plotly_chart(cloud_scatter(noisy, 'Noisy cloud', POINT_COLORS['noisy']),
                    use_container_width=True)
    st.stop()

with st.spinner("Filtering..."):
    filtered_points, report = filtered_model(noisy_points, st.session_state.params_json)
filtered = PointCloud(filtered_points)

render_metric_cards(evaluate(clean, noisy), evaluate(clean, filtered))

left, right = st.columns(2)
with left:
    st.plotly_chart(cloud_scatter(noisy, 'Noisy cloud', POINT_COLORS['noisy']),
                    use_container_width=True)
with right:
    st.plotly_chart(cloud_scatter(filtered, 'Filtered cloud', POINT_COLORS['filtered']),
                    use_container_width=True)

left, right = st.columns(2)
with left:
    st.plotly_chart(runtime_chart(report), use_container_width=True)
with right:
    st.altair_chart(similar_size_histogram(report), use_container_width=True)

st.text('\n'.join(report.to_lines()))

# ==================== SIMILAR SET INSPECTOR ====================
st.header("🔍 Similar Set Inspector")
query = st.number_input("Point index", min_value=0, max_value=len(noisy) - 1, value=0, step=1)
used = FilterParams.model_validate_json(st.session_state.params_json)
table = descriptor_table(noisy_points, used.k, used.descriptor.value)
used_theta = used.theta if used.set_size is None else calibrate_theta(table, used.set_size)
if used.search == SearchMode.LOCAL:
    similar = find_similar_local(int(query), table, used_theta, noisy, build_index(noisy),
                                 used.local_radius_factor)
else:
    similar = find_similar(int(query), table, used_theta)
st.caption(f"θ = {used_theta:.4g}, {len(similar)} similar patches")
st.plotly_chart(similar_set_scatter(noisy, similar), use_container_width=True)
