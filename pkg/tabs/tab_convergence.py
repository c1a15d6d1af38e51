"""
SMMSE Toolkit - Convergence Tab
===============================
Alternating minimization traces per sweep cell.
"""

import plotly.graph_objects as go
import streamlit as st

from components.styles import FIGURE_LAYOUT, PALETTE


def render_convergence_tab(traces):
    """Render the Convergence tab content"""
    st.markdown("### 🔁 Alternating Minimization")

    if not traces:
        st.info("Optimizer traces appear here after loading a results directory or running a sweep.")
        return

    cell = st.selectbox("Sweep cell", sorted(traces))
    trace = traces[cell]

    col1, col2 = st.columns([2, 1])

    with col1:
        fig = go.Figure()
        fig.add_trace(go.Scatter(
            x=trace['iteration'], y=trace['smse_after_a_step'],
            mode='lines+markers', name='after a-update',
            line=dict(color=PALETTE['primary'], width=2),
        ))
        fig.add_trace(go.Scatter(
            x=trace['iteration'], y=trace['smse_after_W_step'],
            mode='lines+markers', name='after W-descent',
            line=dict(color=PALETTE['secondary'], dash='dash', width=2),
        ))
        fig.update_layout(
            title=f'SMSE per outer iteration ({cell})',
            height=420,
            xaxis_title='outer iteration',
            yaxis_title='SMSE',
            yaxis_type='log',
            **FIGURE_LAYOUT,
        )
        st.plotly_chart(fig, use_container_width=True)

    with col2:
        fig_steps = go.Figure(go.Bar(
            x=trace['iteration'],
            y=trace['inner_steps_taken'],
            marker_color=PALETTE['warn'],
        ))
        fig_steps.update_layout(
            title='Armijo steps per iteration',
            height=420,
            xaxis_title='outer iteration',
            yaxis_title='steps',
            **FIGURE_LAYOUT,
        )
        st.plotly_chart(fig_steps, use_container_width=True)

    with st.expander("📋 Trace table"):
        st.dataframe(trace, use_container_width=True)
