import streamlit as st


def apply_explorer_style():
    """
    Applies the dark card/row CSS used by the solver explorer.
    """
    st.markdown("""
    <style>
        .main {
            background-color: #0E1117;
        }

        /* Certificate rows */
        .cert-row {
            display: flex;
            justify-content: space-between;
            align-items: center;
            border-bottom: 1px solid #333;
            padding: 4px 0;
            font-size: 0.85rem;
        }
        .cert-label {
            color: #aaa;
            font-weight: 500;
        }
        .cert-value {
            font-weight: 700;
            color: #eee;
        }
        .cert-pass { color: #00AA00 !important; }
        .cert-fail { color: #AA0000 !important; }
        .cert-muted { color: #777 !important; }

        /* Metric cards */
        .metric-card {
            background-color: #1e1e1e;
            border: 1px solid #333;
            border-radius: 8px;
            padding: 15px;
            margin: 5px;
            box-shadow: 0 4px 6px rgba(0,0,0,0.3);
            text-align: center;
        }
        .metric-card-label {
            font-size: 0.9rem;
            color: #aaa;
            margin-bottom: 5px;
        }
        .metric-card-value {
            font-size: 1.2rem;
            font-weight: 700;
            color: #fff;
        }
        .metric-card-note {
            font-size: 0.75rem;
            color: #888;
        }
    </style>
    """, unsafe_allow_html=True)


def create_metric_card(label, value, note=None):
    """
    Card with a label, a main value and an optional small note line.
    """
    note_html = f'<div class="metric-card-note">{note}</div>' if note else ""
    return f"""
    <div class="metric-card">
        <div class="metric-card-label">{label}</div>
        <div class="metric-card-value">{value}</div>
        {note_html}
    </div>
    """


def create_check_row(check):
    """
    One certificate row: PASS/FAIL in color, greyed out when the hypothesis does
    not hold or the row is informational.
    """
    if not check.applicable:
        status, css = "n/a", "cert-muted"
    elif check.holds:
        status, css = "PASS", "cert-pass"
    else:
        status, css = "FAIL", "cert-fail"
    if check.informational and check.applicable:
        status += " (info)"
        css = "cert-muted" if check.holds else css
    title = f' title="{check.detail}"' if check.detail else ""
    return f"""
    <div class="cert-row"{title}>
        <span class="cert-label">{check.name}</span>
        <span class="cert-value {css}">{status}</span>
    </div>
    """
