"""Scratch: compare ADMM variants for the capacity-constrained assignment."""
import itertools
import numpy as np


def es_opt(scores, caps):
    n, m = scores.shape
    best = -1.0
    for choice in itertools.product(range(-1, m), repeat=n):
        used = np.zeros(m, int)
        ok = True
        obj = 0.0
        for l, r in enumerate(choice):
            if r >= 0:
                used[r] += 1
                if used[r] > caps[r]:
                    ok = False
                    break
                obj += scores[l, r]
        if ok and obj > best:
            best = obj
    return best


def round_and_repair(x, scores, caps):
    n, m = x.shape
    assign = -np.ones(n, int)
    for l in range(n):
        r = int(np.argmax(x[l]))
        if x[l, r] >= 0.5 and scores[l, r] > 0:
            assign[l] = r
    # revoke lowest scores on over-capacity relays
    for r in range(m):
        links = [l for l in range(n) if assign[l] == r]
        while len(links) > caps[r]:
            worst = min(links, key=lambda l: (scores[l, r], -l))
            links.remove(worst)
            assign[worst] = -1
    obj = sum(scores[l, assign[l]] for l in range(n) if assign[l] >= 0)
    return assign, obj


def coord_min_quadratic(x_l, grad_const, rho, coupling_sums, n_pass=30):
    """Minimize c.x + rho/2 ||x + S - R||^2 + rho/2 (sum x - 1)^2 over [0,1]^M
    by exact cyclic coordinate descent. grad_const = c + v_cap + v_row*1,
    coupling_sums = S - R (per entry)."""
    m = len(x_l)
    for _ in range(n_pass):
        delta = 0.0
        for r in range(m):
            rest = x_l.sum() - x_l[r]
            num = -(grad_const[r] + rho * coupling_sums[r] + rho * (rest - 1.0))
            t = num / (2.0 * rho)
            t = min(max(t, 0.0), 1.0)
            delta = max(delta, abs(t - x_l[r]))
            x_l[r] = t
        if delta < 1e-10:
            break
    return x_l


def admm_literal(scores, caps, rho=1.0, iters=100, tol=1e-6):
    n, m = scores.shape
    c = -scores
    x = np.zeros((n, m))
    v_cap = np.zeros(m)
    v_row = np.zeros(n)
    caps_f = caps.astype(float)
    for k in range(iters):
        x_old = x.copy()
        for l in range(n):
            s_others = x.sum(axis=0) - x[l]
            grad_const = c[l] + v_cap + v_row[l]
            x[l] = coord_min_quadratic(x[l].copy(), grad_const, rho,
                                       s_others - caps_f)
        v_cap += rho * (x.sum(axis=0) - caps_f)
        v_row += rho * (x.sum(axis=1) - 1.0)
        if np.abs(x - x_old).max() < tol:
            break
    return round_and_repair(x, scores, caps), k + 1


def coord_min_hinge(x_l, c_l, rho, a_vec, b_scalar, n_pass=30):
    """Minimize c.x + rho/2 sum_r max(0, x_r - a_r)^2 + rho/2 max(0, sum x - b)^2
    over the box; a_r = caps_r - S_others_r - vcap_r/rho, b = 1 - vrow/rho."""
    m = len(x_l)
    for _ in range(n_pass):
        delta = 0.0
        for r in range(m):
            rest = x_l.sum() - x_l[r]
            # piecewise-linear increasing derivative in t:
            # f'(t) = c_r + rho*max(0, t - a_r) + rho*max(0, t + rest - b)
            cr = c_l[r]
            a = a_vec[r]
            bb = b_scalar - rest
            t = None
            if cr >= 0:
                t = 0.0
            else:
                # region below both kinks
                lo_kink = min(a, bb)
                hi_kink = max(a, bb)
                if cr + rho * max(0.0, lo_kink and 0.0) is None:
                    pass
                # try segment below both kinks: f' = c < 0 -> move right
                # segment between kinks: f' = c + rho (t - lo_kink_active)
                cand = lo_kink - cr / rho  # solves c + rho (t - lo_kink) = 0
                if cand <= hi_kink and cand >= lo_kink:
                    t = cand
                else:
                    # both hinges active: c + rho(t-a) + rho(t-bb) = 0
                    cand2 = (a + bb) / 2.0 - cr / (2.0 * rho)
                    if cand2 >= hi_kink:
                        t = cand2
                    else:
                        t = max(lo_kink, 0.0)
            t = min(max(t, 0.0), 1.0)
            delta = max(delta, abs(t - x_l[r]))
            x_l[r] = t
        if delta < 1e-10:
            break
    return x_l


def admm_hinge(scores, caps, rho=1.0, iters=100, tol=1e-6):
    n, m = scores.shape
    c = -scores
    x = np.zeros((n, m))
    v_cap = np.zeros(m)
    v_row = np.zeros(n)
    caps_f = caps.astype(float)
    for k in range(iters):
        x_old = x.copy()
        for l in range(n):
            s_others = x.sum(axis=0) - x[l]
            a_vec = caps_f - s_others - v_cap / rho
            b_scalar = 1.0 - v_row[l] / rho
            x[l] = coord_min_hinge(x[l].copy(), c[l], rho, a_vec, b_scalar)
        v_cap = np.maximum(0.0, v_cap + rho * (x.sum(axis=0) - caps_f))
        v_row = np.maximum(0.0, v_row + rho * (x.sum(axis=1) - 1.0))
        if np.abs(x - x_old).max() < tol:
            break
    return round_and_repair(x, scores, caps), k + 1


def main():
    rng = np.random.default_rng(0)
    stats = {"literal": [], "hinge": []}
    iters_used = {"literal": [], "hinge": []}
    for trial in range(200):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 7))
        cap = int(rng.integers(1, max(2, 6 // m + 1)))
        while m * cap > 6:
            cap -= 1
        cap = max(cap, 1)
        scores = rng.uniform(0, 1, (n, m))
        caps = np.full(m, cap)
        opt = es_opt(scores, caps)
        for name, fn in (("literal", admm_literal), ("hinge", admm_hinge)):
            (assign, obj), k = fn(scores, caps)
            # feasibility
            for r in range(m):
                assert (assign == r).sum() <= caps[r]
            gap = 0.0 if opt == 0 else (opt - obj) / opt
            stats[name].append(gap)
            iters_used[name].append(k)
    for name in stats:
        g = np.array(stats[name])
        print(f"{name:8s} mean gap {g.mean():.4f}  within10% {(g <= 0.10).mean():.3f}"
              f"  max gap {g.max():.3f}  mean iters {np.mean(iters_used[name]):.1f}")


if __name__ == "__main__":
    main()
