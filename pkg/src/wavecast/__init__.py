"""Wavelet-decomposition hybrid forecasting of weekly index prices.

A price series is split by a Haar MODWT into additive components, each
component is forecast one step ahead by an RPROP-trained network or an
epsilon-SVR, and the component forecasts are summed. Evaluation covers RMSE,
directional accuracy, a signed-rank model comparison and a rule-based
trading backtest.
"""
from .modwt import DecomposeConfig, FilterSpec, WaveletDecomposition, modwt_decompose, reconstruct
from .pipeline import ForecastReport, PipelineConfig, compare_models, run_pipeline
from .series import PriceSeries, SplitSpec, Subseries
from .trading import WeeklyQuote, buy_and_hold_roi, run_backtest

__version__ = "0.1.0"
