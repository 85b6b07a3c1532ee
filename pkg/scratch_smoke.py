import numpy as np
import slabflow as sf
from slabflow.fields import Parity, to_physical, to_spectral, constant2
from slabflow.operators import (
    deriv, deriv2, integrate_z_from_zero, vertical_average, sobolev_norm,
    sobolev_norm_sq, solve_neg_laplacian_h, dealias, lift_to_3d,
)
from slabflow.pe import pe_rhs, pe_step, stable_dt_pe, diagnose_pressure_rho1, viscous_term, advective_term, diagnose_w_pe
from slabflow.cpe import cpe_rhs, cpe_step, stable_dt
from slabflow.params import Params, sound_speed_sq
from slabflow.states import PEState, CPEState

g = sf.Grid(16, 16, 16)
X, Y, Z = g.meshgrid()

# round trip random even field
rng = np.random.default_rng(0)
f = rng.standard_normal(g.shape3)
f_even = 0.5 * (f + f[:, :, g.flip_z])
F = to_spectral(f_even, g, Parity.EVEN)
back = to_physical(F)
print("roundtrip even:", np.max(np.abs(back - f_even)))

# deriv: d/dx sin x = cos x
Fs = to_spectral(np.sin(X), g, Parity.EVEN)
dx = to_physical(deriv(Fs, "x"))
print("d/dx sin:", np.max(np.abs(dx - np.cos(X))))

# d/dz cos(pi z) = -pi sin(pi z), parity flip
Fc = to_spectral(np.cos(np.pi * Z), g, Parity.EVEN)
dz = deriv(Fc, "z")
print("d/dz cos(pi z):", np.max(np.abs(to_physical(dz) + np.pi * np.sin(np.pi * Z))), dz.parity)

# integrate_z: cos(pi z) -> sin(pi z)/pi
I = integrate_z_from_zero(Fc)
print("int cos(pi z):", np.max(np.abs(to_physical(I) - np.sin(np.pi * Z) / np.pi)), I.parity)

# vertical average: sin(x)(1+cos(2 pi z)) -> sin(x)
Fv = to_spectral(np.sin(X) * (1 + np.cos(2 * np.pi * Z)), g, Parity.EVEN)
va = vertical_average(Fv)
print("vert avg:", np.max(np.abs(to_physical(va) - np.sin(X[:, :, 0]))))

# sobolev: sin(x) s=0 -> 2 pi
print("||sin x||_L2:", sobolev_norm(Fs, 0), 2 * np.pi, "s=1 ratio:", sobolev_norm(Fs, 1) / sobolev_norm(Fs, 0))

# laplacian solve: rhs=cos(2x), scale 2 -> cos(2x)/8
rhs = to_spectral(np.cos(2 * X[:, :, 0]), g)
u = solve_neg_laplacian_h(rhs, 2.0)
print("poisson:", np.max(np.abs(to_physical(u) - np.cos(2 * X[:, :, 0]) / 8)))

p = Params(rho0=1.0, gamma=2.0, mu=1.0, lam=1.0, eps=0.1, grid=g)
print("validate:", sf.validate(p))
print("c_s^2:", sound_speed_sq(p))

# heat mode: pe_rhs = -pi^2/rho0 v
A = 0.1
vhx = dealias(to_spectral(A * np.cos(np.pi * Z), g, Parity.EVEN))
vhy = sf.to_spectral(np.zeros(g.shape3), g, Parity.EVEN)
s = PEState(vhx, vhy, 0.0)
tend = pe_rhs(s, p)
print("heat rhs:", np.max(np.abs(tend.dvx.coeffs + np.pi**2 / p.rho0 * vhx.coeffs)))

# heat-mode exact decay
dt = stable_dt_pe(s, p)
st = s
nsteps = int(np.ceil(0.1 / dt))
dtc = 0.1 / nsteps
for _ in range(nsteps):
    st = pe_step(st, dtc, p)
exact = A * np.exp(-np.pi**2 * 0.1 / p.rho0) * np.cos(np.pi * Z)
err = np.max(np.abs(to_physical(st.vx) - exact)) / np.max(np.abs(exact))
print(f"heat decay rel err after t=0.1 (dt={dtc:.2e}, nsteps={nsteps}):", err)

# CPE heat mode
rho = constant2(g, p.rho0)
sc = CPEState(rho, vhx, vhy, 0.0)
tendc = cpe_rhs(sc, p)
print("cpe heat rhs:", np.max(np.abs(tendc.dvx.coeffs + np.pi**2 / p.rho0 * vhx.coeffs)),
      "drho:", np.max(np.abs(tendc.drho.coeffs)))
dtcp = stable_dt(sc, p)
nsteps = int(np.ceil(0.1 / dtcp))
dtc2 = 0.1 / nsteps
stc = sc
for _ in range(nsteps):
    stc = cpe_step(stc, dtc2, p)
errc = np.max(np.abs(to_physical(stc.vx) - exact)) / np.max(np.abs(exact))
print(f"cpe heat decay rel err (dt={dtc2:.2e}, nsteps={nsteps}):", errc)

# KEY IDENTITY: projected pe_rhs == explicit-pressure tendency with diagnosed rho1
vx, vy = sf.sample_initial_velocity("baroclinic-taylor-green", 1.0, g)
vx, vy = sf.enforce_compatibility((vx, vy))
spe = PEState(vx, vy, 0.0)
tendp = pe_rhs(spe, p)
rho1 = diagnose_pressure_rho1((vx, vy), p)
w = diagnose_w_pe(vx, vy)
ax, ay = advective_term(vx, vy, w)
fx, fy = viscous_term(vx, vy, p.mu, p.lam)
c2 = sound_speed_sq(p)
gpx = lift_to_3d(deriv2(rho1, "x"))
gpy = lift_to_3d(deriv2(rho1, "y"))
ref_x = (1.0 / p.rho0) * (fx - c2 * gpx) - ax
ref_y = (1.0 / p.rho0) * (fy - c2 * gpy) - ay
print("projection==pressure identity:",
      np.max(np.abs(tendp.dvx.coeffs - ref_x.coeffs)),
      np.max(np.abs(tendp.dvy.coeffs - ref_y.coeffs)))

# E_in scaling sweep (the critical empirical question)
g2 = sf.Grid(32, 32, 16)
vx, vy = sf.sample_initial_velocity("baroclinic-taylor-green", 1.0, g2)
vx, vy = sf.enforce_compatibility((vx, vy))
for eps in (0.1, 0.05, 0.025, 0.0125):
    pp = Params(rho0=1.0, gamma=2.0, mu=1.0, lam=1.0, eps=eps, grid=g2)
    pe0, cpe0 = sf.build_initial_states((vx, vy), pp)
    view = sf.perturbation_view(cpe0, pe0, pp)
    e = sf.energy_total(view, pp)
    print(f"eps={eps}: E_in={e.total:.6e} parts=({e.psi_h2:.2e},{e.eps_psi_t_l2:.2e},{e.xi_h2:.2e},{e.xi_t_l2:.2e}) E_in/eps^2={e.total/eps**2:.4e} E_in/eps^4={e.total/eps**4:.4e}")
