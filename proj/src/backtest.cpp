#include "precim/backtest.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "precim/io.hpp"
#include "precim/kernels.hpp"

namespace precim {

namespace {

/// Numeric JSON fields carry 10 significant digits.
double r10(double v) { return std::stod(fmt_g(v, 10)); }

bool valid_month(const std::string& s) {
    if (s.size() != 7 || s[4] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    return month >= 1 && month <= 12;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

Matrix sym_part(const Matrix& theta) {
    return 0.5 * (theta + theta.transpose());
}

}  // namespace

ReturnsPanel load_returns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open returns file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "date") {
        throw ParseError(path + ": header must be 'date,asset1,...'");
    }

    ReturnsPanel panel;
    panel.assets.assign(header.begin() + 1, header.end());
    const std::size_t p = panel.assets.size();

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != p + 1) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(p + 1) + " cells, got " +
                             std::to_string(cells.size()));
        }
        if (!valid_month(cells[0])) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": date must be YYYY-MM, got '" + cells[0] + "'");
        }
        if (!panel.dates.empty() && cells[0] <= panel.dates.back()) {
            throw NonMonotoneDatesError(path + ":" + std::to_string(line_no) +
                                        ": dates must be strictly increasing at '" +
                                        cells[0] + "'");
        }
        panel.dates.push_back(cells[0]);
        std::vector<double> row(p);
        for (std::size_t c = 0; c < p; ++c) {
            const std::string& cell = cells[c + 1];
            if (cell.empty()) {
                throw MissingValueError(path + ":" + std::to_string(line_no) +
                                        ": missing value in column '" +
                                        panel.assets[c] + "'");
            }
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cell.size() || !std::isfinite(v)) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": non-numeric cell '" + cell + "' in column '" +
                                 panel.assets[c] + "'");
            }
            row[c] = v;
        }
        rows.push_back(std::move(row));
    }

    panel.values = Matrix(static_cast<Index>(rows.size()), static_cast<Index>(p));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            panel.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    return panel;
}

void write_returns(const ReturnsPanel& panel, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "date";
    for (const auto& a : panel.assets) out << ',' << a;
    out << '\n';
    for (Index t = 0; t < panel.n(); ++t) {
        out << panel.dates[static_cast<std::size_t>(t)];
        for (Index j = 0; j < panel.p(); ++j) out << ',' << fmt_g(panel.values(t, j), 12);
        out << '\n';
    }
}

Vector msr_weights(const Vector& mu_hat, const Matrix& theta_hat) {
    require_finite(mu_hat, "msr_weights mu");
    require_finite(theta_hat, "msr_weights theta");
    Vector direction = sym_part(theta_hat) * mu_hat;
    const double budget = kernels::sum(direction.data(),
                                       static_cast<std::size_t>(direction.size()));
    if (std::fabs(budget) <= 1e-12) {
        throw DegenerateDirectionError("msr_weights: direction sums to ~0");
    }
    return direction / budget;
}

Vector gmv_weights(const Matrix& theta_hat) {
    require_finite(theta_hat, "gmv_weights theta");
    Vector direction = sym_part(theta_hat) * Vector::Ones(theta_hat.rows());
    const double budget = kernels::sum(direction.data(),
                                       static_cast<std::size_t>(direction.size()));
    if (std::fabs(budget) <= 1e-12) {
        throw DegenerateDirectionError("gmv_weights: 1'Theta1 is ~0");
    }
    return direction / budget;
}

double sr_ms_estimate(const Vector& mu_hat, const Matrix& theta_hat) {
    require_finite(mu_hat, "sr_ms_estimate mu");
    require_finite(theta_hat, "sr_ms_estimate theta");
    const double q = mu_hat.dot(theta_hat.transpose() * mu_hat);
    return (q >= 0.0 ? 1.0 : -1.0) * std::sqrt(std::fabs(q));
}

Vector drifted_weights(const Vector& w, const Vector& y_next) {
    require_finite(w, "drifted_weights w");
    require_finite(y_next, "drifted_weights y");
    if (w.size() != y_next.size()) throw ShapeMismatchError("drifted_weights: size mismatch");
    const double growth = 1.0 + kernels::dot(w.data(), y_next.data(),
                                             static_cast<std::size_t>(w.size()));
    if (growth <= 0.0) {
        throw PortfolioWipedOutError("drifted_weights: portfolio growth factor <= 0");
    }
    return w.cwiseProduct(Vector::Ones(w.size()) + y_next) / growth;
}

PeriodResult net_return(const Vector& w_new, const Vector& w_prev_drifted,
                        const Vector& y_next, double cost) {
    if (cost < 0.0) throw Error("net_return: cost must be >= 0");
    if (w_new.size() != w_prev_drifted.size() || w_new.size() != y_next.size()) {
        throw ShapeMismatchError("net_return: size mismatch");
    }
    PeriodResult out;
    out.gross = kernels::dot(w_new.data(), y_next.data(),
                             static_cast<std::size_t>(w_new.size()));
    out.turnover = kernels::sum_abs_diff(w_new.data(), w_prev_drifted.data(),
                                         static_cast<std::size_t>(w_new.size()));
    out.net = out.gross - cost * (1.0 + out.gross) * out.turnover;
    return out;
}

BacktestReport rolling_backtest(const ReturnsPanel& panel, Index n_window,
                                const EstimatorSpec& spec, Portfolio portfolio,
                                double cost, int threads) {
    require_finite(panel.values, "rolling_backtest panel");
    const Index n = panel.n(), p = panel.p();
    if (n_window < 24) throw Error("rolling_backtest: window must be >= 24 periods");
    if (n_window >= n) throw Error("rolling_backtest: window must leave out-of-sample periods");

    const Index n_out = n - n_window;
    BacktestReport report;
    report.per_window.reserve(static_cast<std::size_t>(n_out));

    Vector prev_weights;
    Vector prev_realized;
    for (Index t = 0; t < n_out; ++t) {
        const Matrix window = panel.values.middleRows(t, n_window);
        Vector mu_hat(p);
        for (Index j = 0; j < p; ++j) {
            mu_hat(j) = kernels::sum(window.col(j).data(),
                                     static_cast<std::size_t>(n_window)) /
                        static_cast<double>(n_window);
        }
        PrecisionEstimate est;
        try {
            est = estimate_precision(window, spec, nullptr, threads);
        } catch (const Error& e) {
            throw Error("rolling_backtest: window " + std::to_string(t) + ": " + e.what());
        }
        const Vector weights = portfolio == Portfolio::msr
                                   ? msr_weights(mu_hat, est.theta)
                                   : gmv_weights(est.theta);
        const Vector y_next = panel.values.row(t + n_window).transpose();

        // First window trades from its own weights: zero initial turnover.
        const Vector prev_drifted =
            t == 0 ? weights : drifted_weights(prev_weights, prev_realized);
        PeriodResult res = net_return(weights, prev_drifted, y_next, cost);

        WindowRecord rec;
        rec.window_start = t;
        rec.date = panel.dates[static_cast<std::size_t>(t + n_window)];
        rec.weights = weights;
        rec.gross = res.gross;
        rec.net = res.net;
        rec.turnover = res.turnover;
        report.per_window.push_back(std::move(rec));

        prev_weights = weights;
        prev_realized = y_next;
    }

    auto summarize = [n_out](auto&& get) {
        double mean = 0.0;
        for (const auto v : get) mean += v;
        mean /= static_cast<double>(n_out);
        double ss = 0.0;
        for (const auto v : get) ss += (v - mean) * (v - mean);
        const double sd = n_out > 1 ? std::sqrt(ss / static_cast<double>(n_out - 1)) : 0.0;
        return std::pair<double, double>(mean, sd);
    };
    std::vector<double> gross, net, turn;
    for (const auto& rec : report.per_window) {
        gross.push_back(rec.gross);
        net.push_back(rec.net);
        turn.push_back(rec.turnover);
    }
    auto [mg, sg] = summarize(gross);
    auto [mn, sn] = summarize(net);
    report.summary.mean_gross = mg;
    report.summary.sd_gross = sg;
    report.summary.sharpe_gross = sg > 0.0 ? mg / sg : 0.0;
    report.summary.mean_net = mn;
    report.summary.sd_net = sn;
    report.summary.sharpe_net = sn > 0.0 ? mn / sn : 0.0;
    report.summary.avg_turnover =
        kernels::sum(turn.data(), turn.size()) / static_cast<double>(n_out);
    return report;
}

void write_report_json(const BacktestReport& report, const std::string& path) {
    nlohmann::json j;
    const auto& s = report.summary;
    j["summary"] = {{"mean_gross", r10(s.mean_gross)},     {"sd_gross", r10(s.sd_gross)},
                    {"sharpe_gross", r10(s.sharpe_gross)}, {"mean_net", r10(s.mean_net)},
                    {"sd_net", r10(s.sd_net)},             {"sharpe_net", r10(s.sharpe_net)},
                    {"avg_turnover", r10(s.avg_turnover)}};
    auto& windows = j["windows"];
    windows = nlohmann::json::array();
    for (const auto& rec : report.per_window) {
        nlohmann::json w;
        w["window_start"] = rec.window_start;
        w["date"] = rec.date;
        w["gross"] = r10(rec.gross);
        w["net"] = r10(rec.net);
        w["turnover"] = r10(rec.turnover);
        auto& ws = w["weights"];
        ws = nlohmann::json::array();
        for (Index i = 0; i < rec.weights.size(); ++i) ws.push_back(r10(rec.weights(i)));
        windows.push_back(std::move(w));
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_windows_csv(const BacktestReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "window_start,date,gross,net,turnover\n";
    for (const auto& rec : report.per_window) {
        out << rec.window_start << ',' << rec.date << ',' << fmt_g(rec.gross) << ','
            << fmt_g(rec.net) << ',' << fmt_g(rec.turnover) << '\n';
    }
}

}  // namespace precim
