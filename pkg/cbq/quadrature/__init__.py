from .bq_stage1 import BqPosterior, bq_fit
from .cbq_stage2 import CbqModel, cbq_fit, cbq_predict, cbq_predict_joint, fit_heteroscedastic
from .baselines import (mc_estimate, is_estimate, lsmc_fit, lsmc_predict, klsmc_fit, klsmc_predict,
                        mobq_fit, mobq_predict, mobq_estimate, monomial_powers, Polynomial, KernelRidge,
                        MobqModel, MOBQ_CAP)
