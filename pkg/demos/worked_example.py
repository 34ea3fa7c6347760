"""Walk one 21-bit word through concealment and restoration.

Run:  python3 demos/worked_example.py
"""

import numpy as np

from crs import bitcodec, dae, conceal, keygen, restore
from crs.keys import generate_noise_tape

word = "101111001000011110111"  # a_0 is the ancilla; it always comes back as 0
np.set_printoptions(precision=3, suppress=True, linewidth=120)

keys = keygen(2, seed=2024)  # A=0.1, b=b_u=1, sigma1=0.01, sigma2=sigma_v=1
pulse = dae(word)
data = conceal(pulse, keys, generate_noise_tape(keys, pulse.size, trial_seed=0))

print("original  ", word)
for i, u in enumerate(data.u, start=1):
    # reading the concealed signals directly does not give the word back
    print(f"ADE(U^{i})  ", bitcodec.bits_to_str(bitcodec.ade(u)))

rest = restore(data, keys)
print("restored  ", bitcodec.bits_to_str(rest.word))
print("X_hat     ", rest.signal)

# same word, concealed a second time behind the g_c bijection
nl_keys = keygen(2, seed=2024, nonlinear_id="g_c")
nl_data = conceal(pulse, nl_keys, generate_noise_tape(nl_keys, pulse.size, trial_seed=0))
print("g_c U^1   ", nl_data.u[0])
print("g_c word  ", bitcodec.bits_to_str(restore(nl_data, nl_keys).word))
