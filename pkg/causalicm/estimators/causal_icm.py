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

from causalicm.cate import fit_causal_icm_cate
from causalicm.estimators.util import estimator


@estimator("icm", "cicm")
def causal_icm(rct, obs, settings):
    """Two-arm ICM T-learner borrowing strength from the observational study."""

    #-     --method causal_icm [--rho R | --auto-rho] [--kernel rbf|matern32|matern52]
    #-
    #- ```
    #- $ causalicm fit-predict rct.csv obs.csv test.csv --auto-rho --out preds.csv
    #- ```
    #-
    #- Fits one rank-2 intrinsic coregionalization model per treatment arm. The trial and
    #- observational outcome surfaces of an arm are correlated through rho, which is shared by
    #- both arms. With `--auto-rho` rho is picked from the grid by weighted cross-validation on
    #- held-out trial units. rho = 0 reproduces the trial-only GP T-learner and rho = 1 pools
    #- both studies into one GP per arm.

    return fit_causal_icm_cate(rct, obs, rho=settings.rho, kernel_family=settings.kernel_family,
                               seed=settings.seed, grid=settings.grid, folds=settings.folds,
                               tuning_mode=settings.tuning_mode, restarts=settings.restarts,
                               **settings.frozen_kwargs())
