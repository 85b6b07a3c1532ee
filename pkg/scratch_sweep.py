import time
import numpy as np
import slabflow as sf
from slabflow.params import Params
from slabflow.pe import pe_step, stable_dt_pe
from slabflow.cpe import cpe_step, stable_dt
from slabflow.diagnostics import build_report, fit_log_slope

def advance_pe(s, t_target, p):
    while t_target - s.t > 1e-13 * max(1.0, t_target):
        dt = min(stable_dt_pe(s, p), t_target - s.t)
        s = pe_step(s, dt, p, check_cfl=False)
    return sf.PEState(s.vx, s.vy, t_target)

def advance_cpe(s, t_target, p):
    while t_target - s.t > 1e-13 * max(1.0, t_target):
        dt = min(stable_dt(s, p), t_target - s.t)
        s = cpe_step(s, dt, p, check_cfl=False)
    return sf.CPEState(s.rho, s.vx, s.vy, t_target)

g = sf.Grid(32, 32, 16)
v_in = sf.enforce_compatibility(sf.sample_initial_velocity("baroclinic-taylor-green", 1.0, g))
eps_list = [0.1, 0.05, 0.025, 0.0125]
t_end, nout = 0.5, 25
sup_v, sup_rho, sup_w, sup_E, sup_xi = [], [], [], [], []
for eps in eps_list:
    p = Params(rho0=1.0, gamma=2.0, mu=1.0, lam=1.0, eps=eps, grid=g)
    pe, cpe = sf.build_initial_states(v_in, p)
    t0 = time.time()
    mv = mr = mw = mE = mxi = 0.0
    for k in range(nout + 1):
        tt = t_end * k / nout
        pe = advance_pe(pe, tt, p)
        cpe = advance_cpe(cpe, tt, p)
        r = build_report(cpe, pe, p)
        view = sf.perturbation_view(cpe, pe, p)
        from slabflow.operators import sobolev_norm_sq
        xi_n = np.sqrt(sobolev_norm_sq(view.xi, 2)) / eps
        mv, mr, mw, mE, mxi = max(mv, r.conv_h2_v), max(mr, r.conv_h2_rho), max(mw, r.conv_h1_w), max(mE, r.E), max(mxi, xi_n)
    sup_v.append(mv); sup_rho.append(mr); sup_w.append(mw); sup_E.append(mE); sup_xi.append(mxi)
    print(f"eps={eps}: sup_v={mv:.6e} sup_rho={mr:.6e} sup_w={mw:.6e} supE={mE:.6e} supE/eps^2={mE/eps**2:.4e} sup|xi|/eps={mxi:.4e}  [{time.time()-t0:.1f}s]")

for name, ys in [("v_H2", sup_v), ("rho_H2", sup_rho), ("w_H1", sup_w), ("E", sup_E)]:
    sl, ic, r2 = fit_log_slope(eps_list, ys)
    print(f"slope {name}: {sl:.4f} (r2={r2:.6f})")
