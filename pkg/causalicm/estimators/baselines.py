# Copyright (c) 2026 The causalicm developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this software
# and associated documentation files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all copies or
# substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING
# BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM,
# DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

from causalicm.cate import fit_experimental_grounding, fit_tlearner_gp
from causalicm.estimators.util import estimator


@estimator("gp_rct", "exp")
def gp_exp(rct, obs, settings):
    """GP T-learner on the trial only."""

    #-     --method gp_exp
    #-
    #- Independent GPs per arm fitted to the randomized trial. Unbiased inside the trial's
    #- covariate support, but it has nothing to go on outside it.

    return fit_tlearner_gp(rct, settings.kernel_family, settings.seed, settings.restarts,
                           **settings.frozen_kwargs())


@estimator("gp_observational", "obs")
def gp_obs(rct, obs, settings):
    """GP T-learner on the observational study only."""

    #-     --method gp_obs
    #-
    #- Independent GPs per arm fitted to the observational study. It estimates the
    #- observational contrast, which differs from the CATE by the hidden confounding effect.

    return fit_tlearner_gp(obs, settings.kernel_family, settings.seed, settings.restarts)


@estimator("grounding", "eg")
def experimental_grounding(rct, obs, settings):
    """Observational T-learner corrected by a linear bias fitted on the trial."""

    #-     --method experimental_grounding
    #-
    #- Two steps: a GP T-learner on the observational study, then an ordinary least-squares
    #- fit of `psi - omega(x)` on `[1, x]` over the trial units, where
    #- `psi = y (a - e) / (e (1 - e))` is the inverse-probability-weighted pseudo-outcome and
    #- `e` the trial's treatment probability. The linear bias extrapolates outside the trial.

    return fit_experimental_grounding(rct, obs, settings.kernel_family, settings.seed,
                                      settings.treatment_probability, settings.restarts)
