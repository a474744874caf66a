"""Kernel-method image classification: data prep, SVM and logistic
regression training, cross-validated grid search, and report rendering.
"""

from .config import ExperimentConfig, config_from_dict, config_from_file
from .dataset import (LabeledDataset, RgbImage, load_dataset, load_image,
                      save_dataset, vectorize)
from .kernels import (GaussianKernel, LinearKernel, PolynomialKernel,
                      SigmoidKernel, gram, gram_cross)
from .logreg import LogRegConfig, LogRegModel, train_gd
from .metrics import (ConfusionMatrix, RocCurve, accuracy, auc, confusion,
                      roc_from_points, roc_from_scores)
from .model_select import cross_validate, grid_search, kfold_split
from .svm import SvmConfig, SvmModel, train_smo

__version__ = "0.1.0"
