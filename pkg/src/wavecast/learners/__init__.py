from .dataset import RegressionDataset, lag_matrix, make_lagged_dataset
from .mlp import (
    DivergenceError,
    MlpConfig,
    MlpModel,
    RpropState,
    mlp_forward,
    mlp_loss_and_gradient,
    mlp_train_rprop,
)
from .svr import (
    GridSearchError,
    GridSearchResult,
    SvrConfig,
    SvrConvergenceError,
    SvrModel,
    kernel_matrix,
    svr_grid_search,
    svr_predict,
    svr_primal_objective,
    svr_train,
)
