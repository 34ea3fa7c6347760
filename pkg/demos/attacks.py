"""How each eavesdropper model fares against 1000-bit words.

Run:  python3 demos/attacks.py   (about half a minute)
"""

from crs import keygen
from crs.evaluation import AttackScenario, run_trials

T, K = 500, 1000
honest = keygen(2, seed=1)


def rate(bundle, scenario=None):
    return run_trials(bundle, T, K, base_seed=1, attack=scenario).positions.mean.mean()


print(f"honest Bob                     flip rate {rate(honest):.4f}")
for b in (1.1, 2.0, 10.0):
    print(f"wrong b = {b:<5}                flip rate {rate(honest, AttackScenario('wrong_b', {'b': b})):.4f}")
for bu in (1.1, 2.0):
    print(f"wrong b_u = {bu:<5}              flip rate {rate(honest, AttackScenario('wrong_bu', {'b_u': bu})):.4f}")

# guessing the key stream only makes sense when it is raw white noise
real = keygen(2, seed=1, v_mode="real")
for s in (0.1, 1.0, 10.0):
    print(f"guessed v, sigma_eve = {s:<5}   flip rate {rate(real, AttackScenario('guessed_v', {'sigma_eve': s})):.4f}")

for nl in ("g_s", "g_c", "g_ss"):
    keys = keygen(2, seed=1, nonlinear_id=nl)
    print(f"ignores {nl:<5}                  flip rate {rate(keys, AttackScenario('no_nonlinearity')):.4f}")

# tampering with the channel: the linear system shrugs off small noise, g_c does not
for s in (0.07, 0.12):
    r = run_trials(honest, T, K, 1, AttackScenario("external_noise", {"sigma_ext": s}))
    print(f"external noise {s}, linear     flipped positions {int(r.positions.max.sum())}")
r = run_trials(keygen(2, seed=1, nonlinear_id="g_c"), T, K, 1, AttackScenario("external_noise", {"sigma_ext": 0.01}))
print(f"external noise 0.01, g_c      flipped positions {int(r.positions.max.sum())}")
