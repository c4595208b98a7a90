import sys
from pathlib import Path

import numpy as np
import streamlit as st

# run as `streamlit run ui/streamlit_app.py` from the repository root
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from hmec.chaos import CHAOTIC_R_MAX, CHAOTIC_R_MIN, LogisticParams, generate_orbit  # noqa: E402
from hmec.cipher import CipherKey, Mode, decrypt, encrypt, trace_encryption  # noqa: E402
from hmec.cryptanalysis import avalanche_suite  # noqa: E402
from hmec.primitives.hill import HillKey  # noqa: E402
from hmec.utilities.errors import HmecError  # noqa: E402
from hmec.utilities.keyfile import generate_key, parse_key_text, serialize_key  # noqa: E402

st.set_page_config(page_title="Chaotic Cipher Lab", layout="wide")
st.title("Hybrid Message-Embedded Chaotic Cipher Lab")


def sidebar_key():
    st.sidebar.header("Key")
    if st.sidebar.button("Random key"):
        st.session_state["key_text"] = serialize_key(generate_key())
    key_text = st.session_state.get("key_text")
    if key_text:
        try:
            loaded = parse_key_text(key_text).key
        except HmecError as e:
            st.sidebar.error(str(e))
            loaded = None
    else:
        loaded = None

    r = st.sidebar.number_input(
        "r", min_value=CHAOTIC_R_MIN, max_value=CHAOTIC_R_MAX,
        value=loaded.r if loaded else 3.99, step=1e-9, format="%.9f",
    )
    x0 = st.sidebar.number_input("x0", min_value=1e-9, max_value=1 - 1e-9,
                                 value=loaded.x0 if loaded else 0.41, format="%.12f")
    n1 = st.sidebar.number_input("n1", min_value=1, max_value=1000, value=loaded.n1 if loaded else 3)
    n2 = st.sidebar.number_input("n2", min_value=1, max_value=1000, value=loaded.n2 if loaded else 4)
    (a, b), (c, d) = loaded.hill.matrix if loaded else ((3, 5), (7, 2))
    cols = st.sidebar.columns(2)
    a = cols[0].number_input("K[0][0]", 0, 127, a)
    b = cols[1].number_input("K[0][1]", 0, 127, b)
    c = cols[0].number_input("K[1][0]", 0, 127, c)
    d = cols[1].number_input("K[1][1]", 0, 127, d)
    mode = Mode(st.sidebar.radio("Mode", [m.value for m in Mode], index=1))

    try:
        key = CipherKey(r=r, x0=x0, n1=int(n1), n2=int(n2), hill=HillKey(matrix=((a, b), (c, d))))
    except ValueError as e:
        st.sidebar.error(f"Invalid key: {e}")
        return None, mode
    return key, mode


key, mode = sidebar_key()
tab = st.tabs(["Orbit", "Encrypt", "Avalanche"])


with tab[0]:
    st.header("Logistic map orbit")
    with st.form("orbit_form"):
        orbit_r = st.number_input("r", min_value=0.01, max_value=4.0, value=3.57, format="%.9f")
        orbit_x0 = st.number_input("x(0)", min_value=1e-9, max_value=1 - 1e-9, value=0.99, format="%.9f")
        orbit_n = st.number_input("Samples", min_value=1, max_value=100_000, value=1000)
        plotted = st.form_submit_button("Plot")

    if plotted:
        try:
            params = LogisticParams.unrestricted(orbit_r)
            orbit = generate_orbit(params, orbit_x0, int(orbit_n))
            if not CHAOTIC_R_MIN <= orbit_r <= CHAOTIC_R_MAX:
                st.warning("r is outside the chaotic region; shown for comparison only")
            st.line_chart(orbit.values())
            st.metric("Distinct states", len(set(orbit.values())))
        except (HmecError, ValueError) as e:
            st.error(str(e))


with tab[1]:
    st.header("Encrypt text")
    with st.form("encrypt_form"):
        text = st.text_area("Plaintext", "The quick brown fox jumps over the lazy dog.\n" * 4)
        submitted = st.form_submit_button("Encrypt")

    if submitted and key is not None:
        try:
            plaintext = text.encode("utf-8")
            ciphertext = encrypt(key, plaintext, mode)
            recovered = decrypt(key, ciphertext, mode, length=len(plaintext))

            col1, col2, col3 = st.columns(3)
            col1.metric("Plaintext bytes", len(plaintext))
            col2.metric("Ciphertext bytes", len(ciphertext))
            col3.metric("Round trip", "ok" if recovered == plaintext else "MISMATCH")

            st.markdown("#### Ciphertext (hex)")
            st.code(ciphertext.hex(" ", 2), language=None)

            st.markdown("#### Byte histogram")
            counts = np.bincount(np.frombuffer(ciphertext, dtype=np.uint8), minlength=256)
            st.bar_chart(counts)

            with st.expander("Signal path per symbol"):
                st.dataframe([t.model_dump() for t in trace_encryption(key, plaintext, mode)[:256]])
        except HmecError as e:
            st.error(f"{e.error_type}: {e}")


with tab[2]:
    st.header("Quick avalanche run")
    with st.form("avalanche_form"):
        texts = st.number_input("Random texts", min_value=1, max_value=20, value=4)
        length = st.number_input("Text length", min_value=16, max_value=4096, value=256)
        flips = st.number_input("Bit flips per text", min_value=1, max_value=200, value=20)
        seed = st.number_input("Seed", min_value=0, value=0)
        started = st.form_submit_button("Run")

    if started and key is not None:
        rng = np.random.default_rng(int(seed))
        corpus = [rng.integers(32, 127, int(length), dtype=np.uint8).tobytes() for _ in range(int(texts))]
        with st.spinner("Encrypting flipped texts..."):
            try:
                report = avalanche_suite(key, corpus, flips_per_text=int(flips), seed=int(seed), mode=mode)
            except HmecError as e:
                st.error(f"{e.error_type}: {e}")
                report = None

        if report:
            col1, col2, col3 = st.columns(3)
            col1.metric("Plaintext sensitivity", f"{report.plaintext_mean:.2f}%")
            col2.metric("From flipped block on", f"{report.plaintext_tail_mean:.2f}%")
            col3.metric("Key sensitivity", f"{report.key_mean:.2f}%")
            st.dataframe([
                {
                    "Text": row.subject,
                    "Plaintext mean %": row.plaintext.mean,
                    "Tail mean %": row.plaintext.tail_mean,
                    "Key %": row.key.mean,
                }
                for row in report.rows
            ])
