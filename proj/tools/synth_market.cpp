// Writes a small synthetic market (Yahoo-style CSVs) with planted regimes,
// handy for trying the pipeline without downloading data.

#include <iostream>

#include <CLI11.hpp>

#include "mstates/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Synthetic market generator"};
    std::string dir = "synthetic_data";
    int tickers = 8;
    std::size_t days = 120;
    std::uint64_t seed = 7;
    app.add_option("--out", dir, "output directory");
    app.add_option("--tickers", tickers, "number of stocks");
    app.add_option("--days", days, "trading days per regime (three regimes)");
    app.add_option("--seed", seed, "RNG seed");
    CLI11_PARSE(app, argc, argv);

    mstates::synthetic::MarketSpec spec;
    spec.n_tickers = tickers;
    spec.seed = seed;
    spec.regimes = {{days, 0.3, 1.0}, {days, 2.0, 0.5}, {days, 0.3, 1.0}};
    const auto dates = mstates::synthetic::write_market(dir, spec);
    std::cout << "wrote " << tickers << " tickers + index " << spec.index_ticker << " over " << dates.size()
              << " days (" << dates.front().iso() << " .. " << dates.back().iso() << ") to " << dir << "\n";
    return 0;
}
