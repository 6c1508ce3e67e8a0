"""Monte Carlo success probability of ALOHA on a PPP against the closed form.

Run: python demos/ppp_aloha_oracle.py
"""

from netoutage import Aloha, LinkSpec, PathLossModel, PoissonModel, Scenario, estimate_success
from netoutage.outage import success_ppp_aloha_closed

pl = PathLossModel("singular", 4.0)
link = LinkSpec(2.0)
sc = Scenario(PoissonModel(1.0), Aloha(1.0))

print(f"{'eta':>6} {'estimate':>10} {'se':>9} {'exact':>10} {'z':>6}")
for k, eta in enumerate((0.01, 0.05, 0.1, 0.2)):
    est = estimate_success(sc, eta, link, pl, n=20_000, seed=1, point=k)
    exact = success_ppp_aloha_closed(1.0, eta, 2.0, 4.0)
    print(f"{eta:6.2f} {est.p_success:10.6f} {est.std_err:9.2e} {exact:10.6f} {(est.p_success - exact) / est.std_err:+6.2f}")
