"""
Sweep Insights Generator
========================
Turns a results table into short findings about the NMSE sweep
"""

import numpy as np
import streamlit as st

from components.styles import PALETTE


def relative_gain(results):
    """1 - NMSE_smmse / NMSE_lmmse per row"""
    return 1.0 - results['nmse_smmse'] / results['nmse_lmmse']


def generate_insights(results):
    """
    Findings from a results table with the results.csv columns
    """
    insights = []
    if results is None or results.empty:
        return insights

    results = results.assign(gain=relative_gain(results))
    smallest_p = results['p'].min()
    at_smallest = results[results['p'] == smallest_p].sort_values('gain', ascending=False)

    # Gain over the linear estimator at the sparsest prior
    best = at_smallest.iloc[0]
    insights.append({
        'category': '🎯 Gain over LMMSE',
        'finding': f"{best['family']} gains {best['gain'] * 100:.1f}% over the linear estimator at p = {smallest_p:g}",
        'interpretation': "Sparser priors (small p) leave the most room for a shared nonlinearity; "
                          "at p = 2 the structured estimator collapses to the linear one.",
        'color': PALETTE['primary'],
    })

    # Family ordering at the smallest p
    if len(at_smallest) > 1:
        ordering = ' ≥ '.join(f"{row.family} ({row.gain * 100:.1f}%)" for row in at_smallest.itertuples())
        insights.append({
            'category': '🧭 Sensing Matrix Ranking',
            'finding': ordering,
            'interpretation': "Lower-coherence sensing matrices hand the nonlinearity a better-conditioned linear estimate.",
            'color': PALETTE['good'],
        })

    # Closed form vs Monte-Carlo
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.abs(results['nmse_smmse'] - results['nmse_smmse_mc']) / results['nmse_mc_stderr']
    z = z.replace([np.inf, -np.inf], np.nan).dropna()
    if not z.empty:
        insights.append({
            'category': '🔬 Closed Form vs Monte-Carlo',
            'finding': f"largest deviation {z.max():.2f} standard errors over {len(z)} cells",
            'interpretation': "Deviations within about 3 standard errors confirm the closed-form moments.",
            'color': PALETTE['good'] if z.max() <= 3.0 else PALETTE['warn'],
        })

    # l1 comparison
    l1 = results.dropna(subset=['nmse_l1'])
    if not l1.empty:
        wins = int((l1['nmse_smmse'] <= l1['nmse_l1']).sum())
        insights.append({
            'category': '⚖️ Versus l1 Minimization',
            'finding': f"SMMSE matches or beats basis pursuit in {wins} of {len(l1)} cells",
            'interpretation': "Basis pursuit needs one convex solve per measurement; the structured estimator "
                              "is one matrix product and one polynomial (or LUT) per coordinate.",
            'color': PALETTE['secondary'],
        })

    return insights


def render_insight_card(insight):
    """Render a single insight card"""
    color = insight.get('color', PALETTE['primary'])
    st.markdown(f"""
    <div style='background: rgba(255,255,255,0.95); padding: 20px; border-radius: 12px;
                margin: 15px 0; border-left: 5px solid {color}; box-shadow: 0 4px 12px rgba(0,0,0,0.1);'>
        <h4 style='color: {color}; margin: 0 0 10px 0;'>{insight['category']}</h4>
        <p style='margin: 8px 0; font-weight: 600; color: #2d2d2d;'>
            📌 <strong>Finding:</strong> {insight['finding']}
        </p>
        <p style='margin: 8px 0; color: #4a4a4a; line-height: 1.6;'>
            💡 <strong>Interpretation:</strong> {insight['interpretation']}
        </p>
    </div>
    """, unsafe_allow_html=True)
