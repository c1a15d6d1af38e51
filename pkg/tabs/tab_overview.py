"""
SMMSE Toolkit - Overview Tab
============================
NMSE versus p per sensing matrix family.
"""

import plotly.graph_objects as go
import streamlit as st

from components.insights import relative_gain
from components.styles import FIGURE_LAYOUT, PALETTE, family_color


def nmse_figure(results):
    """Closed form solid, Monte-Carlo dashed, l1 dotted, one colour per family"""
    fig = go.Figure()
    for family, rows in results.groupby('family', sort=False):
        rows = rows.sort_values('p')
        color = family_color(family)
        fig.add_trace(go.Scatter(
            x=rows['p'], y=rows['nmse_smmse'],
            mode='lines+markers', name=f"{family} SMMSE",
            line=dict(color=color, width=3),
        ))
        fig.add_trace(go.Scatter(
            x=rows['p'], y=rows['nmse_smmse_mc'],
            mode='lines', name=f"{family} Monte-Carlo",
            line=dict(color=color, dash='dash', width=2),
            error_y=dict(type='data', array=rows['nmse_mc_stderr'], visible=True),
        ))
        if rows['nmse_l1'].notna().any():
            fig.add_trace(go.Scatter(
                x=rows['p'], y=rows['nmse_l1'],
                mode='lines', name=f"{family} l1",
                line=dict(color=color, dash='dot', width=2),
            ))

    linear = results.groupby('p')['nmse_lmmse'].mean().sort_index()
    fig.add_trace(go.Scatter(
        x=linear.index, y=linear.values,
        mode='lines', name='LMMSE',
        line=dict(color=PALETTE['bad'], width=2),
    ))
    fig.update_layout(
        title='NMSE vs p',
        height=480,
        xaxis_title='p',
        yaxis_title='NMSE',
        **FIGURE_LAYOUT,
    )
    return fig


def render_overview_tab(results):
    """Render the Overview tab content"""
    st.markdown("### 📊 NMSE vs p")

    if results is None or results.empty:
        st.info("Load a results directory or run a quick sweep to see the NMSE curves.")
        return

    col1, col2 = st.columns([2.5, 1.5])

    with col1:
        st.plotly_chart(nmse_figure(results), use_container_width=True)

    with col2:
        gains = results.assign(gain=relative_gain(results) * 100)
        fig_gain = go.Figure()
        for family, rows in gains.groupby('family', sort=False):
            fig_gain.add_trace(go.Bar(
                x=rows['p'].map(lambda p: f"{p:g}"),
                y=rows['gain'],
                name=family,
                marker_color=family_color(family),
            ))
        fig_gain.update_layout(
            title='Gain over LMMSE (%)',
            height=480,
            barmode='group',
            xaxis_title='p',
            yaxis_title='%',
            **FIGURE_LAYOUT,
        )
        st.plotly_chart(fig_gain, use_container_width=True)

    st.markdown("---")
    st.markdown("#### 📋 Results Table")
    st.dataframe(
        results.style.format({
            'p': '{:g}',
            'nmse_smmse': '{:.5f}',
            'nmse_smmse_mc': '{:.5f}',
            'nmse_mc_stderr': '{:.2e}',
            'nmse_lmmse': '{:.5f}',
            'nmse_l1': '{:.5f}',
            'nmse_l1_stderr': '{:.2e}',
        }),
        use_container_width=True,
    )
