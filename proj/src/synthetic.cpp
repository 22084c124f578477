#include "mstates/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "mstates/error.hpp"

namespace mstates::synthetic {

Eigen::MatrixXd random_correlation(int n, int rank, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(n, rank);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j) x(i, j) = g(rng);
    for (int i = 0; i < n; ++i) x.row(i).normalize();
    Eigen::MatrixXd c = x * x.transpose();
    c.diagonal().setOnes();
    return c;
}

Eigen::VectorXd random_unit_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);
    return v.normalized();
}

std::vector<EpochCorrelation> planted_epochs(const std::vector<Eigen::MatrixXd>& centers,
                                             const std::vector<int>& regime, double noise, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-noise, noise);
    std::vector<EpochCorrelation> out;
    const auto days = business_days(Date::ymd(2006, 1, 3), regime.size() + 20);
    for (std::size_t e = 0; e < regime.size(); ++e) {
        const auto& c = centers.at(static_cast<std::size_t>(regime[e]));
        EpochCorrelation m;
        m.epoch_id = static_cast<int>(e);
        m.start = days[e];
        m.end = days[e + 19];
        m.matrix = c;
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < c.cols(); ++j) {
                m.matrix(i, j) = m.matrix(j, i) = std::clamp(c(i, j) + u(rng), -1.0, 1.0);
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<int> simulate_chain(const Eigen::MatrixXd& probs, std::size_t steps, int start_state, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> out;
    out.reserve(steps);
    int s = start_state - 1;
    for (std::size_t t = 0; t < steps; ++t) {
        out.push_back(s + 1);
        const double r = u(rng);
        double cum = 0.0;
        int next = static_cast<int>(probs.cols()) - 1;
        for (Eigen::Index b = 0; b < probs.cols(); ++b) {
            cum += probs(s, b);
            if (r < cum) {
                next = static_cast<int>(b);
                break;
            }
        }
        s = next;
    }
    return out;
}

std::vector<Date> business_days(Date first, std::size_t count) {
    std::vector<Date> out;
    out.reserve(count);
    Date d = first;
    while (out.size() < count) {
        const std::chrono::weekday wd{d.sys_days()};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
        d = Date::from_days(d.days_since_epoch() + 1);
    }
    return out;
}

std::vector<Date> write_market(const std::filesystem::path& dir, const MarketSpec& spec) {
    std::filesystem::create_directories(dir);
    const std::size_t total = std::accumulate(spec.regimes.begin(), spec.regimes.end(), std::size_t{0},
                                              [](std::size_t a, const Regime& r) { return a + r.days; });
    if (total < 2) throw ConfigError("synthetic market needs at least two days");
    const auto dates = business_days(spec.first_day, total);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> g;
    const int n = spec.n_tickers;
    Eigen::MatrixXd prices(n + 1, static_cast<Eigen::Index>(total));
    prices.col(0).setConstant(100.0);
    std::size_t t = 1;
    for (const auto& reg : spec.regimes) {
        for (std::size_t d = 0; d < reg.days && t < total; ++d, ++t) {
            const double f = g(rng);
            double index_ret = 0.0;
            for (int i = 0; i < n; ++i) {
                const double r = spec.daily_vol * (reg.market_loading * f + reg.noise * g(rng));
                index_ret += r / n;
                prices(i, static_cast<Eigen::Index>(t)) = prices(i, static_cast<Eigen::Index>(t - 1)) * std::exp(r);
            }
            prices(n, static_cast<Eigen::Index>(t)) = prices(n, static_cast<Eigen::Index>(t - 1)) * std::exp(index_ret);
        }
    }

    char name[32];
    for (int i = 0; i <= n; ++i) {
        std::string ticker = i == n ? spec.index_ticker : (std::snprintf(name, sizeof name, "T%03d", i), name);
        std::vector<bool> drop(total, false);
        for (const auto& [who, offsets] : spec.gaps) {
            if (who != i) continue;
            for (auto o : offsets)
                if (o < total) drop[o] = true;
        }
        std::ofstream out(dir / (ticker + ".csv"));
        out << "Date,Open,High,Low,Close,Adj Close,Volume\n";
        for (std::size_t d = 0; d < total; ++d) {
            if (drop[d]) continue;
            char line[160];
            const double p = prices(i, static_cast<Eigen::Index>(d));
            std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%.6f,%.10f,1000\n", dates[d].iso().c_str(), p, p, p, p, p);
            out << line;
        }
    }
    return dates;
}

}  // namespace mstates::synthetic
