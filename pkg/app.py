"""
SMMSE Toolkit - Sweep Dashboard
===============================
Browse NMSE-vs-p sweeps, optimal nonlinearities and optimizer traces
"""

from pathlib import Path

import streamlit as st

from components.errors import SmmseError
from components.insights import generate_insights, relative_gain, render_insight_card
from components.matrices import MatrixFamily, MatrixSpec
from components.optimizer import OptimizerConfig
from components.styles import PALETTE, apply_custom_styles, render_header, render_metric_card
from utils.config import ExperimentConfig, setup_logging
from utils.experiment import load_sweep, run, sweep_bundle

from tabs.tab_overview import render_overview_tab
from tabs.tab_nonlinearities import render_nonlinearities_tab
from tabs.tab_convergence import render_convergence_tab
from tabs.tab_validation import render_validation_tab


def quick_sweep_config():
    """A reduced grid that finishes in about a minute"""
    return ExperimentConfig(
        matrices=[
            MatrixSpec(MatrixFamily.EQUIANGULAR_TIGHT_FRAME, 3, 6),
            MatrixSpec(MatrixFamily.SUBSAMPLED_ORTHOGONAL, 3, 6),
            MatrixSpec(MatrixFamily.NORMALIZED_GAUSSIAN, 3, 6),
        ],
        p_grid=[0.4, 1.0, 2.0],
        degree=5,
        optimizer=OptimizerConfig(max_outer_iterations=15, max_inner_steps=50),
        mc_samples=10_000,
    )


# Page configuration
st.set_page_config(
    page_title="SMMSE Toolkit",
    layout="wide",
    page_icon="📐"
)
setup_logging()

# Initialize session state
if 'bundle' not in st.session_state:
    st.session_state.bundle = None
if 'validation_report' not in st.session_state:
    st.session_state.validation_report = None

# Apply styling
apply_custom_styles()
render_header()

# Load / run section
col1, col2, col3 = st.columns([1, 2, 1])
with col2:
    results_dir = st.text_input("📂 Results directory", value="results")
    load_col, run_col = st.columns(2)

    with load_col:
        if st.button("📥 Load results", use_container_width=True):
            if (Path(results_dir) / 'results.csv').exists():
                st.session_state.bundle = load_sweep(results_dir)
                st.rerun()
            else:
                st.error(f"No results.csv in {results_dir}")

    with run_col:
        if st.button("🚀 Run quick sweep", use_container_width=True):
            with st.spinner("Training estimators over the quick grid..."):
                try:
                    result = run(quick_sweep_config(), write=False)
                except SmmseError as exc:
                    st.error(f"Sweep failed: {exc}")
                else:
                    st.session_state.bundle = sweep_bundle(result)
                    st.rerun()

# Main Dashboard
bundle = st.session_state.bundle
if bundle is not None and not bundle['results'].empty:
    results = bundle['results']
    smallest_p = results['p'].min()
    gain_at_smallest = relative_gain(results[results['p'] == smallest_p]).max()

    metric_configs = [
        ("🏆 Best SMMSE NMSE", f"{results['nmse_smmse'].min():.4f}", PALETTE['primary']),
        (f"📉 Gain at p = {smallest_p:g}", f"{gain_at_smallest * 100:.1f}%", PALETTE['good']),
        ("🧮 Sweep Cells", len(results), PALETTE['secondary']),
        ("🧯 Failures", len(bundle['failures']), PALETTE['bad'] if bundle['failures'] else PALETTE['good']),
    ]

    cols = st.columns(4)
    for idx, (label, value, color) in enumerate(metric_configs):
        with cols[idx]:
            render_metric_card(label, value, color)

    st.markdown("<br>", unsafe_allow_html=True)

    st.markdown("## 💡 Key Findings")
    insights = generate_insights(results)
    insight_cols = st.columns(2)
    for idx, insight in enumerate(insights):
        with insight_cols[idx % 2]:
            render_insight_card(insight)

    st.markdown("---")

    tab1, tab2, tab3, tab4 = st.tabs([
        "📊 NMSE vs p",
        "📈 Nonlinearities",
        "🔁 Convergence",
        "🔬 Validation"
    ])

    with tab1:
        render_overview_tab(results)

    with tab2:
        render_nonlinearities_tab(bundle['luts'], results)

    with tab3:
        render_convergence_tab(bundle['traces'])

    with tab4:
        render_validation_tab(bundle['timing'], bundle['failures'])

else:
    # Welcome screen
    st.markdown("<br><br>", unsafe_allow_html=True)

    col1, col2, col3 = st.columns(3)

    features = [
        ("📐 Closed-Form Moments", "Exact Bayesian MSE from Gamma-function moments of the ball prior"),
        ("🔁 Alternating Minimization", "Exact polynomial update alternated with Armijo descent on W"),
        ("⚖️ Baselines", "LMMSE and l1 minimization on the same Monte-Carlo budget")
    ]

    for idx, (title, desc) in enumerate(features):
        with [col1, col2, col3][idx]:
            st.markdown(f"""
            <div class='metric-card' style='text-align: center; min-height: 180px;'>
                <h3 style='margin-bottom: 15px; font-size: 1.5rem;'>{title}</h3>
                <p style='opacity: 0.8; font-size: 1rem;'>{desc}</p>
            </div>
            """, unsafe_allow_html=True)

    st.markdown("<br>", unsafe_allow_html=True)
    st.info("👆 Load a results directory written by `python cli.py run`, or run a quick sweep", icon="💡")
