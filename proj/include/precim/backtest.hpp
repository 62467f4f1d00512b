#pragma once

#include <string>
#include <vector>

#include "precim/estimators.hpp"

namespace precim {

/// Excess-return panel in decimal units (0.01 = 1%); dates are YYYY-MM and
/// strictly increasing.
struct ReturnsPanel {
    std::vector<std::string> dates;   // length n
    std::vector<std::string> assets;  // length p
    Matrix values;                    // n x p

    Index n() const { return values.rows(); }
    Index p() const { return values.cols(); }
};

/// Parse "date,asset1,...,assetP" CSV. Duplicate or non-increasing dates,
/// blank cells, and non-numeric cells are rejected with row/column context.
ReturnsPanel load_returns(const std::string& path);

/// Inverse of load_returns (10 significant digits).
void write_returns(const ReturnsPanel& panel, const std::string& path);

/// Maximum-Sharpe-ratio weights: direction Theta_sym * mu, normalized to
/// unit budget. Theta_sym = (Theta + Theta')/2.
Vector msr_weights(const Vector& mu_hat, const Matrix& theta_hat);

/// Global-minimum-variance weights: Theta_sym * 1 / (1' Theta_sym 1).
Vector gmv_weights(const Matrix& theta_hat);

/// Plug-in maximum-Sharpe estimate sign(q) * sqrt(|q|) with q = mu' Theta' mu.
/// A negative value signals an indefinite precision estimate rather than an
/// error.
double sr_ms_estimate(const Vector& mu_hat, const Matrix& theta_hat);

/// End-of-period weights after the market moves by y_next.
Vector drifted_weights(const Vector& w, const Vector& y_next);

struct PeriodResult {
    double gross = 0.0;
    double net = 0.0;
    double turnover = 0.0;
};

/// gross = w_new' y_next; turnover = l1 distance to the drifted previous
/// weights; net = gross - c * (1 + gross) * turnover.
PeriodResult net_return(const Vector& w_new, const Vector& w_prev_drifted,
                        const Vector& y_next, double cost);

enum class Portfolio { msr, gmv };

struct WindowRecord {
    Index window_start = 0;  // first row of the estimation window
    std::string date;        // realization date (row window_start + n_window)
    Vector weights;
    double gross = 0.0;
    double net = 0.0;
    double turnover = 0.0;
};

struct BacktestSummary {
    double mean_gross = 0.0, sd_gross = 0.0, sharpe_gross = 0.0;
    double mean_net = 0.0, sd_net = 0.0, sharpe_net = 0.0;
    double avg_turnover = 0.0;
};

struct BacktestReport {
    std::vector<WindowRecord> per_window;
    BacktestSummary summary;
};

/// Rolling one-step-ahead protocol: estimate on each length-n_window slice,
/// realize on the following period, chain turnover through drifted weights
/// (the first window starts at zero turnover). `cost` is per unit turnover
/// (0.001 = 10bp). Summary SD uses the n-n_I-1 denominator.
BacktestReport rolling_backtest(const ReturnsPanel& panel, Index n_window,
                                const EstimatorSpec& spec, Portfolio portfolio,
                                double cost, int threads = 0);

void write_report_json(const BacktestReport& report, const std::string& path);
void write_windows_csv(const BacktestReport& report, const std::string& path);

}  // namespace precim
