"""
SMMSE Toolkit - Validation Tab
==============================
Oracle checks, timing and the per-cell failure manifest.
"""

import pandas as pd
import plotly.graph_objects as go
import streamlit as st

from components.styles import FIGURE_LAYOUT, PALETTE, render_metric_card
from utils.validation import ValidationSettings, run_validation


def render_validation_tab(timing, failures):
    """Render the Validation tab content"""
    st.markdown("### 🔬 Validation")

    if st.button("Run oracle checks", use_container_width=True):
        with st.spinner("Checking moments, gradients and SMSE against independent oracles..."):
            st.session_state.validation_report = run_validation(
                ValidationSettings(moment_cases=8, gradient_cases=4, smse_cases=4, mc_samples=20_000)
            )

    report = st.session_state.get('validation_report')
    if report is not None:
        passed = int(report['passed'].sum())
        col1, col2 = st.columns(2)
        with col1:
            render_metric_card("Checks passed", passed, PALETTE['good'])
        with col2:
            render_metric_card("Checks failed", len(report) - passed, PALETTE['bad'] if passed < len(report) else PALETTE['good'])

        ratios = report.assign(ratio=report['error'] / report['tolerance'])
        fig = go.Figure(go.Bar(
            x=ratios['suite'] + ' #' + ratios.groupby('suite').cumcount().astype(str),
            y=ratios['ratio'],
            marker_color=[PALETTE['good'] if ok else PALETTE['bad'] for ok in ratios['passed']],
        ))
        fig.add_hline(y=1.0, line_dash='dash', line_color=PALETTE['bad'])
        fig.update_layout(
            title='Error / tolerance per check',
            height=380,
            yaxis_title='ratio',
            yaxis_type='log',
            **FIGURE_LAYOUT,
        )
        st.plotly_chart(fig, use_container_width=True)
        with st.expander("📋 All checks"):
            st.dataframe(report, use_container_width=True)

    st.markdown("---")
    st.markdown("#### ⏱️ Apply vs l1 solve")
    if timing:
        frame = pd.DataFrame.from_dict(timing, orient='index')
        frame['speedup'] = frame['l1_seconds'] / frame['apply_seconds']
        st.dataframe(frame.style.format('{:.3g}'), use_container_width=True)
    else:
        st.info("No timing information in this sweep.")

    st.markdown("#### 🧯 Failed cells")
    if failures:
        st.dataframe(pd.DataFrame(failures), use_container_width=True)
    else:
        st.success("Every sweep cell completed.")
