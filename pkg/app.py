import tempfile
from fractions import Fraction
from pathlib import Path

import pandas as pd
import streamlit as st

# Custom Modules
from analysis import CLASS_NAMES, AnalysisParams, certify_local_optimum
from circular import ColorCodingParams
from data import load_instance
from generators import (
    LowerBoundParams,
    berman_tight_packing,
    gen_alternating_cycle,
    gen_high_girth_regular,
    gen_incidence_lowerbound,
    gen_random_packing,
)
from instance import as_graph
from oracle import DEFAULT_ORACLE_LIMIT, exact_mwis
from search import SolverConfig, solve
from styles import apply_explorer_style, create_check_row, create_metric_card
from utils import fmt_ratio, fmt_weight, parse_rational


# 페이지 설정
st.set_page_config(
    page_title="clawpack 탐색기",
    page_icon="🕸️",
    layout="wide"
)

# CSS 스타일 적용
apply_explorer_style()

# -------------------------------------------------------------
# 0. Session State 초기화
# -------------------------------------------------------------
if 'last_run' not in st.session_state:
    st.session_state.last_run = None


@st.cache_data
def build_family(family, d, pairs, eps, alpha, girth_l, n_sets, k, universe, weights, seed):
    """
    선택한 생성기로 인스턴스를 만들고 (instance, A side) 를 반환합니다.
    """
    if family == "Berman tight":
        inst, side, _ = berman_tight_packing(d)
        return inst, side
    if family == "Alternating cycle":
        g, side, _ = gen_alternating_cycle(pairs, d, eps)
        return g, side
    if family == "Incidence lower bound":
        H = gen_high_girth_regular(d - 1, girth_l, seed)
        g, side, _ = gen_incidence_lowerbound(LowerBoundParams(d, alpha, eps, girth_l), H)
        return g, side
    return gen_random_packing(n_sets, k, universe, weights, seed), None


@st.cache_data
def run_solver(_obj, obj_key, mode, alpha, cap_c, scale_n, seed, unit, start, cc_mode):
    """
    알고리즘을 실행하고 (trace, oracle, report) 또는 에러 메시지를 반환합니다.
    """
    try:
        g = as_graph(_obj)
        cfg = SolverConfig(
            mode=mode,
            alpha=parse_rational(alpha),
            size_cap_factor=parse_rational(cap_c),
            scaling_N=parse_rational(scale_n) if scale_n else None,
            rng_seed=seed,
            unit=unit,
            start=start,
            circular=ColorCodingParams(mode=cc_mode),
        )
        trace = solve(g, cfg)
        scored = g.with_weights([1] * g.n) if unit else g
        oracle, report = None, None
        if g.n <= DEFAULT_ORACLE_LIMIT:
            oracle = exact_mwis(scored)
            if mode in ("squareimp", "logimp") and not trace.scaled:
                report = certify_local_optimum(
                    scored, trace.final.members, oracle.best.members, AnalysisParams.from_delta("1/2")
                )
        return (trace, oracle, report), None
    except Exception as e:
        return None, str(e)


# -------------------------------------------------------------
# 1. 사이드바: 인스턴스 & 알고리즘 선택
# -------------------------------------------------------------
st.sidebar.header("인스턴스")
source = st.sidebar.radio("Source", ["Generator", "Upload"], horizontal=True)

obj, side, obj_key = None, None, None
if source == "Generator":
    family = st.sidebar.selectbox(
        "Family", ["Berman tight", "Alternating cycle", "Incidence lower bound", "Random packing"]
    )
    d = st.sidebar.number_input("d", min_value=3, max_value=8, value=4)
    pairs = st.sidebar.number_input("pairs", min_value=2, max_value=30, value=5)
    eps = st.sidebar.text_input("eps", "1/2")
    alpha_family = st.sidebar.text_input("alpha (lower bound)", "1")
    girth_l = st.sidebar.number_input("girth", min_value=3, max_value=8, value=5)
    n_sets = st.sidebar.number_input("sets", min_value=1, max_value=40, value=12)
    k = st.sidebar.number_input("k", min_value=1, max_value=5, value=3)
    universe = st.sidebar.number_input("universe", min_value=1, max_value=60, value=9)
    weights = st.sidebar.selectbox("weights", ["uniform", "near-unit"])
    seed_family = st.sidebar.number_input("instance seed", min_value=0, value=0)
    try:
        obj, side = build_family(
            family, int(d), int(pairs), eps, alpha_family, int(girth_l),
            int(n_sets), int(k), int(universe), weights, int(seed_family)
        )
        obj_key = (family, d, pairs, eps, alpha_family, girth_l, n_sets, k, universe, weights, seed_family)
    except Exception as e:
        st.sidebar.error(f"생성 실패: {e}")
else:
    uploaded = st.sidebar.file_uploader("instance (.txt / .json)", type=["txt", "json"])
    if uploaded is not None:
        suffix = Path(uploaded.name).suffix
        with tempfile.NamedTemporaryFile("wb", suffix=suffix, delete=False) as fh:
            fh.write(uploaded.getvalue())
        obj, err = load_instance(fh.name)
        if err:
            st.sidebar.error(f"인스턴스 로드 실패: {err}")
        obj_key = (uploaded.name, len(uploaded.getvalue()))

st.sidebar.header("알고리즘")
mode = st.sidebar.selectbox("algorithm", ["squareimp", "logimp", "param", "greedy"])
alpha = st.sidebar.text_input("alpha", "2")
cap_c = st.sidebar.text_input("size cap C", "1")
scale_n = st.sidebar.text_input("scaling N (empty = off)", "")
cc_mode = st.sidebar.selectbox("circular search", ["randomized", "exhaustive"])
seed = st.sidebar.number_input("seed", min_value=0, value=0)
unit = st.sidebar.checkbox("unit weights")
use_side = st.sidebar.checkbox("start from the family's A side", value=False, disabled=side is None)

# -------------------------------------------------------------
# 2. 메인: 결과
# -------------------------------------------------------------
st.title("clawpack 탐색기")

if obj is None:
    st.info("사이드바에서 인스턴스를 선택하세요.")
    st.stop()

g = as_graph(obj)
st.caption(f"{g.n} vertices, {len(g.edges())} edges, claw bound d = {g.claw_bound()}")

if st.button("실행 (Run)", type="primary"):
    start = frozenset(side) if use_side and side is not None else None
    with st.spinner("local search 실행 중..."):
        result, err = run_solver(obj, obj_key, mode, alpha, cap_c, scale_n, int(seed), unit, start, cc_mode)
    st.session_state.last_run = (result, err)

if st.session_state.last_run is not None:
    result, err = st.session_state.last_run
    if err:
        st.error(f"실행 실패: {err}")
        st.stop()
    trace, oracle, report = result
    final_w = trace.final.total_w if not unit else Fraction(len(trace.final))
    d_claw = g.claw_bound()

    c1, c2, c3, c4 = st.columns(4)
    with c1:
        st.markdown(create_metric_card("Final weight", fmt_weight(final_w), f"|A| = {len(trace.final)}"), unsafe_allow_html=True)
    with c2:
        opt = oracle.optimum_w if oracle else None
        st.markdown(create_metric_card("Optimum", fmt_weight(opt), "exact oracle" if oracle else "n too large"), unsafe_allow_html=True)
    with c3:
        ratio = opt / final_w if opt is not None and final_w else None
        st.markdown(create_metric_card("Ratio w(A*)/w(A)", fmt_ratio(ratio), f"d/2 = {d_claw / 2:g}"), unsafe_allow_html=True)
    with c4:
        st.markdown(create_metric_card("Iterations", trace.iterations, trace.status), unsafe_allow_html=True)

    tab_trace, tab_cert = st.tabs(["개선 기록 (Improvements)", "인증서 (Certificate)"])
    with tab_trace:
        rows = [
            {"#": i + 1, "kind": r.kind, "|X|": r.size, "gain": str(r.delta_w2)}
            for i, r in enumerate(trace.improvements)
        ]
        st.dataframe(pd.DataFrame(rows), use_container_width=True, hide_index=True)
        st.write("Final members:", trace.final.sorted_members())
        for note in trace.notes:
            st.caption(note)
    with tab_cert:
        if report is None:
            st.info("인증서는 oracle 범위 안의 squareimp / logimp 실행에서만 계산됩니다.")
        else:
            col_rows, col_classes = st.columns([0.4, 0.6])
            with col_rows:
                for check in report.checks:
                    st.markdown(create_check_row(check), unsafe_allow_html=True)
            with col_classes:
                classes = pd.DataFrame(
                    [{"u": u, **{name: name in t for name in CLASS_NAMES}} for u, t in sorted(report.classes.items())]
                )
                st.dataframe(classes, use_container_width=True, hide_index=True)
                sums = pd.DataFrame(
                    [
                        {
                            "v": v,
                            "w(v)": str(g.w(v)) if not unit else "1",
                            "charge+": str(report.charges.positive[v]),
                            "contr": str(report.contributions.totals[v]),
                            "T_v": sorted(report.charges.T[v]),
                        }
                        for v in sorted(report.charges.positive)
                    ]
                )
                st.dataframe(sums, use_container_width=True, hide_index=True)
