# # Estimating narrowband interference from signs alone
#
# Strong narrowband transmitters swamp the weak wideband echo, but their
# spectra are sparse: a handful of sinusoids with frequencies that hold still
# over the CPI.  Two stages estimate them from the one-bit data:
#
# 1. a group-sparse fit on a fixed frequency grid (ADMM inside an MM loop)
#    produces coarse frequencies ordered by strength, and
# 2. the maximum-likelihood solver grows a sinusoid model one component at a
#    time, refining frequencies off-grid with zero-padded FFT searches.

import numpy as np

from onebit_radar import (FiConfig, MmConfig, ThresholdMatrix, fast_freq_init,
                          mmrelax_full, sign_sample, simulate_table5_rfi)
from onebit_radar.signal_model import make_rng

n, m = 512, 96
t = ThresholdMatrix(400.0, n, m)

params = simulate_table5_rfi(a1=200.0, m_slow=m, n_fast=n, seed=7)
rfi = params.synthesize(n)
noise = 60.0 * make_rng(8).standard_normal((n, m))
signed = sign_sample(rfi + noise, t)
print("true frequencies (rad/sample):", np.round(np.sort(params.freqs), 5))

fi = fast_freq_init(signed.data, t.full(), FiConfig(), k_max=5)
print("coarse grid estimates      :", np.round(np.sort(fi.omegas), 5))

fit = mmrelax_full(signed.data, t.full(), 5, fi.omegas, MmConfig(),
                   lam_init=fi.lam)
est = np.sort(fit.params.freqs)
print("maximum-likelihood estimates:", np.round(est, 5))
print("errors:", np.round(est - np.sort(params.freqs), 6))
amp_est = np.hypot(fit.params.amps_a, fit.params.amps_b).mean(axis=1) / fit.params.lam
print("mean amplitude estimates:", np.round(np.sort(amp_est)[::-1], 1),
      " (true:", np.round(np.sort(200.0 * np.array([1, .95, .9, .87, .8]))[::-1], 1), ")")
nll = [stage.nll for stage in fit.stages]
print("likelihood value per added component:", np.round(nll, 1))
