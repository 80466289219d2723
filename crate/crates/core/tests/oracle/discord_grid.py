"""Independent two-qubit discord reference values.

Pure states: discord equals the entanglement entropy of the kept qubit.
All states: exhaustive search over (phi1, phi2, phi3) in [0, pi]^3 at 0.02 rad
for the minimum post-measurement conditional entropy, measuring qubit B.

Writes ../golden/discord_two_qubit.json. Uses numpy only.
"""

import json
import pathlib

import numpy as np

GRID = np.arange(0.0, np.pi + 1e-12, 0.02)


def entropy_bits(eigs):
    eigs = np.asarray(eigs)
    eigs = eigs[eigs > 1e-12]
    return float(-(eigs * np.log2(eigs)).sum())


def h2_from_2x2(a, b, off):
    """Entropy (bits) of unnormalized 2x2 Hermitian blocks, times their trace."""
    t = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.sqrt((a - b) ** 2 + 4 * np.abs(off) ** 2)
        out = np.zeros_like(t)
        for sign in (1.0, -1.0):
            lam = (t + sign * disc) / 2
            q = np.where(t > 1e-12, lam / np.where(t > 1e-12, t, 1.0), 0.0)
            term = np.where(q > 1e-12, -q * np.log2(np.where(q > 1e-12, q, 1.0)), 0.0)
            out += term
    return np.where(t > 1e-12, t * out, 0.0)


def grid_min_conditional(rho):
    r = rho.reshape(2, 2, 2, 2)  # r[a, b, a', b']
    p2, p3 = np.meshgrid(GRID, GRID, indexing="ij")
    best = np.inf
    for p1 in GRID:
        s, c = np.sin(p1), np.cos(p1)
        # Columns of U: u0 = (s e^{i p2}, c e^{i p3}), u1 = (c e^{-i p3}, -s e^{-i p2}).
        u0 = np.stack([s * np.exp(1j * p2), c * np.exp(1j * p3)])
        u1 = np.stack([c * np.exp(-1j * p3), -s * np.exp(-1j * p2)])
        total = np.zeros_like(p2)
        for u in (u0, u1):
            sig = np.einsum("bxy,abcd,dxy->acxy", u.conj(), r, u)
            total += h2_from_2x2(sig[0, 0].real, sig[1, 1].real, sig[0, 1])
        best = min(best, float(total.min()))
    return best


def random_pure(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    return v / np.linalg.norm(v)


def marginal(rho):
    return np.einsum("abcb->ac", rho.reshape(2, 2, 2, 2))


def main():
    rng = np.random.default_rng(20240611)
    pure = []
    for _ in range(20):
        psi = random_pure(rng)
        rho = np.outer(psi, psi.conj())
        s_a = entropy_bits(np.linalg.eigvalsh(marginal(rho)))
        cmin = grid_min_conditional(rho)
        pure.append({
            "amplitudes_re": psi.real.tolist(),
            "amplitudes_im": psi.imag.tolist(),
            "entanglement_entropy": s_a,
            "grid_discord": s_a - cmin,
        })
    mixed = []
    for _ in range(6):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        m = v.reshape(4, 2)  # (AB, C)
        rho = m @ m.conj().T
        s_a = entropy_bits(np.linalg.eigvalsh(marginal(rho)))
        cmin = grid_min_conditional(rho)
        mixed.append({
            "rho_re": rho.real.tolist(),
            "rho_im": rho.imag.tolist(),
            "grid_discord": s_a - cmin,
        })
    out = {"grid_step": 0.02, "pure": pure, "mixed": mixed}
    path = pathlib.Path(__file__).resolve().parent.parent / "golden" / "discord_two_qubit.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {path}")
    for m in mixed:
        print("mixed grid discord", m["grid_discord"])


if __name__ == "__main__":
    main()
