"""
SMMSE Toolkit - Nonlinearities Tab
==================================
Optimal shared nonlinearities T as exported look-up tables.
"""

import numpy as np
import pandas as pd
import plotly.graph_objects as go
import streamlit as st

from components.styles import FIGURE_LAYOUT


def origin_slope(lut):
    """Slope of T at t = 0 after normalizing t and T by the LUT range, sign folded in"""
    t = lut['t'].to_numpy()
    T = lut['T'].to_numpy()
    R = np.max(np.abs(t))
    scale = np.max(np.abs(T))
    if R == 0 or scale == 0:
        return 0.0
    return float(abs(np.interp(0.0, t / R, np.gradient(T / scale, t / R))))


def render_nonlinearities_tab(luts, results):
    """Render the Nonlinearities tab content"""
    st.markdown("### 📈 Optimal Nonlinearities")

    if not luts:
        st.info("LUTs appear here after loading a results directory or running a sweep.")
        return

    families = list(dict.fromkeys(results['family']))
    family = st.selectbox("Sensing matrix family", families)
    normalize = st.checkbox("Normalize t and T by their range", value=True)
    rows = results[results['family'] == family].sort_values('p')

    fig = go.Figure()
    colors = np.linspace(0.0, 1.0, max(len(rows), 2))
    slopes = []
    for color, p in zip(colors, rows['p']):
        lut = luts.get(f"{family}_{p:g}")
        if lut is None:
            continue
        t, T = lut['t'], lut['T']
        if normalize:
            t = t / max(np.max(np.abs(t)), np.finfo(float).tiny)
            T = T / max(np.max(np.abs(T)), np.finfo(float).tiny)
        fig.add_trace(go.Scatter(
            x=t, y=T,
            mode='lines', name=f"p = {p:g}",
            line=dict(color=f"rgb({int(102 + 153 * color)}, {int(126 - 55 * color)}, {int(234 - 147 * color)})", width=2),
        ))
        slopes.append({'p': p, 'slope at origin': origin_slope(lut)})

    fig.update_layout(
        title=f'T(t) for {family}',
        height=450,
        xaxis_title='t / R' if normalize else 't',
        yaxis_title='T / max|T|' if normalize else 'T(t)',
        **FIGURE_LAYOUT,
    )

    col1, col2 = st.columns([2.5, 1.5])
    with col1:
        st.plotly_chart(fig, use_container_width=True)
    with col2:
        st.markdown("#### Shrinkage at the origin")
        st.markdown("*Identity-like curves at p = 2 flatten into shrinkage as p decreases*")
        st.dataframe(pd.DataFrame(slopes), use_container_width=True)
