"""Smoke test for the portq_py extension.

Build the extension and make it importable first, e.g.

    cargo build --release -p portq-py --features extension-module
    cp target/release/libportq_py.so python/portq_py.so
    python3 python/smoke_test.py
"""

import json
import math

import portq_py as pq


def close(a, b, tol):
    return abs(a - b) <= tol * abs(b)


def main():
    single = pq.DipoleArray(1, 0.5)
    w0 = single.omega0
    p = single.point(w0, [1.0])
    m = pq.synthesize_match(p.y0, [1.0], w0)
    qt = pq.q_tarc(p.y0, p.dy0, m, [1.0], w0)
    qz = pq.q_zm(p.y0, p.dy0, [1.0], w0)
    assert close(qt, qz, 1e-9), (qt, qz)
    assert m.tarc(p.y0, [1.0], w0) < 1e-10
    eta2 = pq.eta_second_derivative(p.y0, p.dy0, m, [1.0], w0)
    assert close(math.sqrt(-0.5 * w0 * w0 * eta2), qt, 1e-9)
    print(f"single dipole: Q_tarc {qt:.4f}, match {m}")

    a = pq.dipoles2(0.75, "in-phase")
    assert a.f_swept is not None
    assert abs(a.f_predicted - a.f_swept) / a.f_swept < 0.1
    report = json.loads(a.to_json())
    assert report["report"]["q_tarc"] == a.q_tarc
    print(f"two dipoles d=0.75: {a}")

    pair = pq.DipoleArray(2, 0.25)
    text = pair.touchstone()
    net = pq.Network.from_touchstone(text, 2)
    direct = pair.analyze([1, -1])
    again = net.analyze("out-of-phase", w0 / (2 * math.pi))
    assert close(again.q_tarc, direct.q_tarc, 5e-3), (again.q_tarc, direct.q_tarc)
    print(f"touchstone round trip: {direct.q_tarc:.4f} -> {again.q_tarc:.4f}")

    f = pq.fbw_predict(10.0, 0.2)
    assert close(pq.q_fbw(f, 0.2), 10.0, 1e-12)
    assert close(pq.tarc_approx(10.0, 1.0, 1.0, 0.997), math.sqrt(0.003), 1e-12)

    try:
        pq.dipoles2(0.75, "sideways")
    except ValueError as e:
        print(f"rejected feeding: {e}")
    else:
        raise AssertionError("unknown feeding accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
