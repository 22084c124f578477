#include "mstates/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include <omp.h>

#include "mstates/dynamics.hpp"
#include "mstates/epoch_store.hpp"
#include "mstates/error.hpp"
#include "mstates/io.hpp"
#include "mstates/mds.hpp"
#include "mstates/spectral.hpp"

namespace mstates {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStoreLayout = "mstates-store-1";

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

nlohmann::json moments_json(const Moments& m) {
    return {{"count", m.count},
            {"mean", m.mean},
            {"variance", m.variance},
            {"skewness", opt_json(m.skewness)},
            {"excess_kurtosis", opt_json(m.excess_kurtosis)}};
}

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

Pipeline::Pipeline(RunConfig config) : cfg_(std::move(config)) {
    validate(cfg_);
    if (cfg_.threads > 0) omp_set_num_threads(cfg_.threads);
    fs::create_directories(cfg_.output_dir);
}

template <typename F>
void Pipeline::run_stage(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool cached = false;
    try {
        cached = body();
    } catch (const Error& e) {
        throw Error(e.kind(), "stage '" + name + "': " + e.what());
    } catch (const fs::filesystem_error& e) {
        throw DataError("stage '" + name + "': " + e.what());
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    stages_.push_back({name, dt.count(), cached});
}

const std::string& Pipeline::data_digest() {
    if (!data_digest_) {
        if (!fs::is_directory(cfg_.data_dir)) throw DataError("data directory not found: " + cfg_.data_dir.string());
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(cfg_.data_dir)) {
            if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        std::string acc;
        for (const auto& f : files) acc += f.filename().string() + ":" + sha256_file(f) + "\n";
        data_digest_ = sha256_hex(acc);
    }
    return *data_digest_;
}

std::string Pipeline::correlation_key(CorrelationKind kind) {
    std::ostringstream os;
    os << kStoreLayout << '|' << data_digest() << '|' << cfg_.index_ticker << '|' << cfg_.horizon.start.iso() << '|'
       << cfg_.horizon.end.iso() << '|' << cfg_.epoch.length << '|' << cfg_.epoch.shift << '|' << to_string(kind);
    return sha256_hex(os.str());
}

std::string Pipeline::states_key(CorrelationKind kind, int k) {
    std::ostringstream os;
    os << correlation_key(kind) << '|' << k << '|' << cfg_.seed << '|' << cfg_.restarts << '|' << cfg_.max_iterations
       << '|' << to_string(cfg_.cluster_metric);
    return sha256_hex(os.str());
}

fs::path Pipeline::states_dir(CorrelationKind kind, int k) const {
    return cfg_.output_dir / to_string(kind) / ("k" + std::to_string(k));
}

const PriceTable& Pipeline::ingest() {
    if (prices_) return *prices_;
    run_stage("ingest", [&] {
        const auto series = load_quote_directory(cfg_.data_dir);
        const auto calendar = build_calendar(series, cfg_.horizon);
        prices_ = filter_universe(series, calendar, cfg_.index_ticker);
        auto manifest = ingest_manifest(*prices_);
        nlohmann::json diag = nlohmann::json::object();
        for (const auto& s : series) {
            if (!s.diagnostics.empty()) diag[s.ticker] = s.diagnostics;
        }
        manifest["diagnostics"] = diag;
        write_json(cfg_.output_dir / "ingest_manifest.json", manifest);
        return false;
    });
    return *prices_;
}

const ReturnsMatrix& Pipeline::returns() {
    if (returns_) return *returns_;
    const auto& prices = ingest();
    run_stage("returns", [&] {
        returns_ = log_returns(prices);
        return false;
    });
    return *returns_;
}

const EpochStack& Pipeline::correlations(CorrelationKind kind) {
    if (auto it = stacks_.find(kind); it != stacks_.end()) return it->second;
    const fs::path store = cfg_.output_dir / "cache" / (to_string(kind) + ".epcm");
    const std::string key = correlation_key(kind);
    if (cfg_.cache && fs::exists(store) && fs::exists(sidecar_path(store))) {
        bool hit = false;
        run_stage("correlate:" + to_string(kind), [&] {
            const auto side = read_sidecar(store);
            if (side.value("extra", nlohmann::json::object()).value("cache_key", "") == key) {
                stacks_.emplace(kind, read_epoch_store(store));
                hit = true;
            }
            return hit;
        });
        if (hit) return stacks_.at(kind);
        stages_.pop_back();
    }
    const auto& r = returns();
    run_stage("correlate:" + to_string(kind), [&] {
        auto stack = compute_epochs(r, cfg_.epoch, kind);
        fs::create_directories(store.parent_path());
        write_epoch_store(store, stack, {{"cache_key", key}});
        stacks_.emplace(kind, std::move(stack));
        return false;
    });
    return stacks_.at(kind);
}

const StateSequence& Pipeline::states(CorrelationKind kind, int k) {
    const auto id = std::make_pair(kind, k);
    if (auto it = states_.find(id); it != states_.end()) return it->second;
    const auto& stack = correlations(kind);
    const auto dir = states_dir(kind, k);
    const std::string key = states_key(kind, k);
    const std::string name = "cluster:" + to_string(kind) + ":k" + std::to_string(k);

    run_stage(name, [&] {
        if (cfg_.cache && fs::exists(dir / "summary.json")) {
            const auto summary = read_json(dir / "summary.json");
            if (summary.value("extra", nlohmann::json::object()).value("cache_key", "") == key) {
                auto saved = load_states(dir);
                if (saved.seq.labels.size() == stack.size()) {
                    saved.seq.epoch_dates = stack.end_dates();
                    states_.emplace(id, std::move(saved.seq));
                    return true;
                }
            }
        }
        KMeansOptions opt;
        opt.k = k;
        opt.seed = derive_seed(cfg_.seed, "cluster/" + to_string(kind) + "/k" + std::to_string(k));
        opt.restarts = cfg_.restarts;
        opt.max_iterations = cfg_.max_iterations;
        opt.metric = cfg_.cluster_metric;
        auto seq = kmeans_states(stack, opt);
        save_states(dir, seq, stack, {{"cache_key", key}});
        states_.emplace(id, std::move(seq));
        return false;
    });
    return states_.at(id);
}

void Pipeline::correlate() {
    for (auto kind : cfg_.kinds) correlations(kind);
}

void Pipeline::cluster() {
    std::ostringstream csv;
    csv << "kind,k,epoch_id,end_date,state_id\n";
    for (auto kind : cfg_.kinds) {
        for (int k : cfg_.k_values) {
            const auto& seq = states(kind, k);
            const auto& stack = correlations(kind);
            for (std::size_t e = 0; e < seq.labels.size(); ++e) {
                csv << to_string(kind) << ',' << k << ',' << stack.epochs[e].epoch_id << ','
                    << stack.epochs[e].end.iso() << ',' << seq.labels[e] << '\n';
            }
        }
    }
    write_text(cfg_.output_dir / "fig1_states.csv", csv.str());
}

void Pipeline::transitions() {
    cluster();
    run_stage("transitions", [&] {
        std::ostringstream fig;
        fig << "kind,k,from,to,count,prob\n";
        nlohmann::json all = nlohmann::json::object();
        for (auto kind : cfg_.kinds) {
            for (int k : cfg_.k_values) {
                const auto& seq = states(kind, k);
                const auto model = transition_matrix(seq.labels, k);
                std::ostringstream csv;
                csv << "from,to,count,prob\n";
                for (int a = 0; a < k; ++a) {
                    for (int b = 0; b < k; ++b) {
                        const std::string row = std::to_string(a + 1) + ',' + std::to_string(b + 1) + ',' +
                                                std::to_string(model.counts(a, b)) + ',' + fmt(model.probs(a, b));
                        csv << row << '\n';
                        fig << to_string(kind) << ',' << k << ',' << row << '\n';
                    }
                }
                const auto dir = states_dir(kind, k);
                write_text(dir / "transitions.csv", csv.str());

                nlohmann::json diag;
                diag["equilibrium"] = vec_json(model.equilibrium);
                diag["equilibrium_converged"] = model.equilibrium_converged;
                diag["empirical_freq"] = vec_json(model.empirical_freq);
                std::vector<int> flagged;
                for (int r : model.flagged_rows) flagged.push_back(r + 1);
                diag["flagged_rows"] = flagged;
                diag["tridiagonal_score"] = nearly_tridiagonal_score(model.probs, model.empirical_freq);
                if (seq.labels.size() >= 3) {
                    const auto mk = markovianity_check(seq.labels, k, {cfg_.ck_threshold, cfg_.tv_threshold});
                    diag["ck_deviation"] = mk.ck_deviation;
                    diag["tv_distance"] = mk.tv_distance;
                    diag["ck_pass"] = mk.ck_pass;
                    diag["tv_pass"] = mk.tv_pass;
                } else {
                    diag["ck_deviation"] = nullptr;
                }
                write_json(dir / "diagnostics.json", diag);
                all[to_string(kind) + "/k" + std::to_string(k)] = diag;
            }
        }
        write_text(cfg_.output_dir / "fig3_transitions.csv", fig.str());
        write_json(cfg_.output_dir / "fig3_diagnostics.json", all);
        return false;
    });
}

void Pipeline::spectra() {
    correlate();
    run_stage("spectra", [&] {
        std::ostringstream pr_csv, eig_csv;
        pr_csv << "kind,epoch_id,end_date,pr_top,top_eigenvalue,degenerate_flag\n";
        eig_csv << "kind,epoch_id,end_date";
        for (int i = 1; i <= 10; ++i) eig_csv << ",lambda" << i;
        eig_csv << '\n';
        nlohmann::json moments_doc = nlohmann::json::object();
        for (auto kind : cfg_.kinds) {
            const auto& stack = correlations(kind);
            std::vector<Eigen::VectorXd> leading;
            const auto series = pr_series(stack, &leading, 10);
            for (std::size_t e = 0; e < series.size(); ++e) {
                const auto& p = series[e];
                pr_csv << to_string(kind) << ',' << p.epoch_id << ',' << p.end_date.iso() << ',' << fmt(p.pr_top) << ','
                       << fmt(p.top_eigenvalue) << ',' << (p.degenerate ? 1 : 0) << '\n';
                eig_csv << to_string(kind) << ',' << p.epoch_id << ',' << p.end_date.iso();
                for (int i = 0; i < 10; ++i) {
                    eig_csv << ',' << (i < leading[e].size() ? fmt(leading[e](i)) : "");
                }
                eig_csv << '\n';
            }
            nlohmann::json per = nlohmann::json::object();
            for (const auto& period : cfg_.periods) {
                nlohmann::json entry = {{"start", period.range.start.iso()}, {"end", period.range.end.iso()}};
                try {
                    entry.update(moments_json(pr_period_moments(series, period.range)));
                } catch (const DataError& e) {
                    entry["count"] = 0;
                    entry["error"] = e.what();
                }
                per[period.name] = entry;
            }
            moments_doc[to_string(kind)] = per;
        }
        write_text(cfg_.output_dir / "fig5_pr.csv", pr_csv.str());
        write_text(cfg_.output_dir / "eigenvalues_top10.csv", eig_csv.str());
        write_json(cfg_.output_dir / "fig6_moments.json", moments_doc);
        return false;
    });
}

void Pipeline::histograms() {
    correlate();
    run_stage("histograms", [&] {
        std::ostringstream csv;
        const auto edges = histogram_edges(cfg_.bins);
        csv << "kind,epoch_id,end_date,mean,variance,skewness,excess_kurtosis";
        for (int j = 0; j < cfg_.bins; ++j) {
            csv << ',' << fmt(0.5 * (edges[static_cast<std::size_t>(j)] + edges[static_cast<std::size_t>(j) + 1]));
        }
        csv << '\n';
        for (auto kind : cfg_.kinds) {
            const auto& stack = correlations(kind);
            for (std::size_t e = 0; e < stack.size(); ++e) {
                const auto row = stack.upper.row(static_cast<Eigen::Index>(e));
                const auto h = element_histogram(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                                                 cfg_.bins, stack.epochs[e].epoch_id);
                csv << to_string(kind) << ',' << h.epoch_id << ',' << stack.epochs[e].end.iso() << ','
                    << fmt(h.moments.mean) << ',' << fmt(h.moments.variance) << ',' << opt_fmt(h.moments.skewness)
                    << ',' << opt_fmt(h.moments.excess_kurtosis);
                for (auto c : h.counts) csv << ',' << c;
                csv << '\n';
            }
        }
        write_text(cfg_.output_dir / "fig4_histograms.csv", csv.str());
        return false;
    });
}

void Pipeline::mds() {
    if (!cfg_.mds) return;
    const auto& seq = states(cfg_.mds_kind, cfg_.mds_k);
    const auto& stack = correlations(cfg_.mds_kind);
    run_stage("mds", [&] {
        const auto d = pairwise_distances(stack, cfg_.mds_metric);
        const auto emb = classical_mds(d, cfg_.mds_dims);
        std::ostringstream csv;
        csv << "epoch_id,end_date";
        if (cfg_.mds_dims == 3) {
            csv << ",x,y,z";
        } else {
            for (int c = 1; c <= cfg_.mds_dims; ++c) csv << ",d" << c;
        }
        csv << ",state_id\n";
        for (std::size_t e = 0; e < stack.size(); ++e) {
            csv << stack.epochs[e].epoch_id << ',' << stack.epochs[e].end.iso();
            for (int c = 0; c < cfg_.mds_dims; ++c) csv << ',' << fmt(emb.coords(static_cast<Eigen::Index>(e), c));
            csv << ',' << seq.labels[e] << '\n';
        }
        write_text(cfg_.output_dir / "figS3_mds.csv", csv.str());
        write_json(cfg_.output_dir / "mds.json", {{"kind", to_string(cfg_.mds_kind)},
                                                  {"k", cfg_.mds_k},
                                                  {"metric", to_string(cfg_.mds_metric)},
                                                  {"n", d.n},
                                                  {"dims", cfg_.mds_dims},
                                                  {"eigenvalues_used", vec_json(emb.eigenvalues_used)},
                                                  {"raw_eigenvalues", vec_json(emb.raw_eigenvalues)},
                                                  {"stress", emb.stress},
                                                  {"clamped", emb.clamped},
                                                  {"all_zero", emb.all_zero},
                                                  {"converged", emb.converged}});
        if (!emb.converged) throw NumericError("MDS eigensolver did not converge");
        return false;
    });
}

RunReport Pipeline::finish() {
    RunReport rep;
    rep.output_dir = cfg_.output_dir;
    rep.config_hash = sha256_hex(canonical_text(cfg_));
    rep.stages = stages_;
    for (const auto& entry : fs::recursive_directory_iterator(cfg_.output_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), cfg_.output_dir);
        const auto top = *rel.begin();
        if (top == "cache" || rel == "manifest.json") continue;
        rep.checksums[rel.generic_string()] = sha256_file(entry.path());
    }
    write_text(cfg_.output_dir / "manifest.json", manifest_text(cfg_, rep));
    return rep;
}

RunReport Pipeline::report() {
    correlate();
    cluster();
    transitions();
    spectra();
    histograms();
    mds();
    return finish();
}

RunReport run_pipeline(const RunConfig& config) {
    Pipeline p(config);
    return p.report();
}

std::string manifest_text(const RunConfig& cfg, const RunReport& report) {
    nlohmann::json j;
    j["config"] = canonical_text(cfg);
    j["config_hash"] = report.config_hash;
    auto stages = nlohmann::json::array();
    for (const auto& s : report.stages) stages.push_back({{"name", s.name}, {"seconds", s.seconds}, {"cached", s.cached}});
    j["stages"] = stages;
    j["outputs"] = report.checksums;
    return j.dump(2) + "\n";
}

}  // namespace mstates
