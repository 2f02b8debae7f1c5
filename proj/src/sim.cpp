#include "plantcap/sim.hpp"

#include "plantcap/bna.hpp"
#include "plantcap/errors.hpp"
#include "plantcap/mle.hpp"
#include "plantcap/prob_kernel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

namespace plantcap {

namespace {

struct Kahan {
    double sum = 0.0, carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

using ReplicateOutcome = std::vector<ReplicateRow>; // one entry per tracked param

} // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::mle: return "mle";
        case Backend::bayes: return "bayes";
        case Backend::bna: return "bna";
        case Backend::up: return "up";
    }
    return "?";
}

Backend backend_from_name(const std::string& name) {
    if (name == "mle") return Backend::mle;
    if (name == "bayes" || name == "mcmc") return Backend::bayes;
    if (name == "bna") return Backend::bna;
    if (name == "up") return Backend::up;
    fail(Errc::bad_config, "unknown backend '" + name + "' (expected mle, bayes, bna or up)");
}

const MetricRow* SimReport::find(const std::string& param) const {
    for (const auto& r : rows)
        if (r.param == param) return &r;
    return nullptr;
}

std::vector<std::int64_t> largest_remainder_split(std::int64_t total,
                                                  std::span<const double> weights) {
    std::vector<std::int64_t> out(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::int64_t assigned = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double exact = static_cast<double>(total) * weights[k];
        out[k] = static_cast<std::int64_t>(std::floor(exact));
        assigned += out[k];
        remainders.emplace_back(exact - std::floor(exact), k);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::int64_t r = 0; r < total - assigned; ++r) ++out[remainders[static_cast<std::size_t>(r)].second];
    return out;
}

ClassedCounts generate(const SimTruth& truth, std::int64_t m_total, Rng& rng) {
    const std::size_t K = truth.n_classes();
    const auto m_split = largest_remainder_split(m_total, truth.weights);
    const auto h_split = largest_remainder_split(
        static_cast<std::int64_t>(std::llround(truth.h_total)), truth.weights);

    ClassedCounts out;
    for (std::size_t k = 0; k < K; ++k) {
        const double pc = truth.p_c[k];
        const double pic = truth.model == Model::basic ? 0.0 : truth.p_i_c;
        const CellProbs theta = theta_id(pc, pic, truth.p_mb);
        const double cells[4] = {theta[0], theta[1], theta[2], theta[3]};
        const auto m = rng.multinomial(m_split[k], std::span<const double>(cells, 4));

        const std::int64_t z = rng.binomial(m[2], conditional_capture_ni(pc, pic));
        const std::int64_t h_c = rng.binomial(h_split[k], pc);

        IdCounts c;
        c.m_i = m[0];
        c.m_yes = m[1];
        c.m_mb = m[2];
        c.m_no = m[3];
        c.y = c.m_i + c.m_yes + z + h_c;
        if (truth.model == Model::id || truth.model == Model::classed)
            c.h_i = rng.binomial(h_c, truth.p_i_c);
        if (truth.model == Model::basic) c.h_i.reset();
        const std::string label =
            k < truth.labels.size() ? truth.labels[k] : "class" + std::to_string(k + 1);
        out.classes.push_back({label, c});
    }
    return validate(out);
}

namespace {

std::vector<std::string> tracked_params(const SimScenario& sc) {
    std::vector<std::string> names{"H"};
    if (sc.backend == Backend::up) names.push_back("H0");
    const SimTruth& t = sc.truth;
    if (t.model == Model::classed)
        for (std::size_t k = 0; k < t.n_classes(); ++k) names.push_back("p_c[" + t.labels[k] + "]");
    else
        names.push_back("p_c");
    if (t.model != Model::basic) names.push_back("p_i_c");
    names.push_back(t.model == Model::basic ? "p_mb" : "p_mb_ni");
    return names;
}

double truth_of(const SimScenario& sc, const std::string& name) {
    const SimTruth& t = sc.truth;
    if (name == "H" || name == "H0") return t.h_total;
    if (name == "p_i_c") return t.p_i_c;
    if (name == "p_mb" || name == "p_mb_ni") return t.p_mb;
    if (name == "p_c") return t.p_c[0];
    for (std::size_t k = 0; k < t.n_classes(); ++k)
        if (name == "p_c[" + t.labels[k] + "]") return t.p_c[k];
    fail(Errc::bad_config, "no truth for parameter '" + name + "'");
}

ReplicateOutcome fit_replicate(const SimScenario& sc, const ClassedCounts& data,
                               const std::vector<std::string>& names, std::uint64_t rep) {
    FitResult fit;
    switch (sc.backend) {
        case Backend::mle: fit = mle_numeric(sc.truth.model, data); break;
        case Backend::bna: fit = bna_fit(sc.truth.model, data, sc.prior); break;
        case Backend::bayes:
        case Backend::up: {
            McmcConfig cfg = sc.mcmc;
            cfg.seed = Rng::derive(sc.seed, rep ^ 0xb01dface).uniform_int(0, 1LL << 62);
            cfg.jobs = 1; // replicates already run in parallel
            const McmcOutput out = sc.backend == Backend::bayes
                                       ? sample_posterior(sc.truth.model, data, sc.prior, cfg)
                                       : sample_posterior_up(sc.truth.model, data, sc.prior, cfg);
            fit = out.as_fit_result();
            break;
        }
    }
    ReplicateOutcome rows;
    for (const auto& name : names) {
        const ParamEstimate* pe = name == "H" ? &fit.h_total : fit.find(name);
        if (pe == nullptr) fail(Errc::bad_config, "fit lacks parameter '" + name + "'");
        double point = pe->estimate;
        if (name == "H" && (sc.backend == Backend::mle || sc.backend == Backend::bna))
            point = fit.h_continuous;
        rows.push_back({point, pe->sd, pe->ci_lo, pe->ci_hi});
    }
    return rows;
}

} // namespace

SimReport run_study(const SimScenario& sc) {
    if (sc.replicates < 1) fail(Errc::bad_config, "replicates must be >= 1");
    const auto names = tracked_params(sc);
    const auto n_rep = static_cast<std::size_t>(sc.replicates);

    std::vector<std::optional<ReplicateOutcome>> outcomes(n_rep);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t rep = next.fetch_add(1); rep < n_rep; rep = next.fetch_add(1)) {
            Rng rng = Rng::derive(sc.seed, rep);
            try {
                const ClassedCounts data = generate(sc.truth, sc.m_total, rng);
                outcomes[rep] = fit_replicate(sc, data, names, rep);
            } catch (const Error&) {
                outcomes[rep] = std::nullopt; // counted as a failed replicate
            }
        }
    };

    int jobs = sc.jobs > 0 ? sc.jobs : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n_rep)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::future<void>> futs;
        futs.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) futs.push_back(std::async(std::launch::async, worker));
        for (auto& f : futs) f.get();
    }

    SimReport report;
    report.model = sc.truth.model;
    report.backend = sc.backend;
    report.m_total = sc.m_total;
    report.replicates = sc.replicates;
    for (const auto& o : outcomes)
        if (!o) ++report.failures;
    const auto n_ok = static_cast<double>(n_rep) - static_cast<double>(report.failures);
    if (n_ok == 0) fail(Errc::all_replicates_failed, "every replicate failed to fit");

    for (std::size_t j = 0; j < names.size(); ++j) {
        std::vector<ReplicateRow> rows;
        rows.reserve(static_cast<std::size_t>(n_ok));
        for (const auto& o : outcomes)
            if (o) rows.push_back((*o)[j]);
        report.rows.push_back(
            aggregate_metric(names[j], truth_of(sc, names[j]), rows, sc.replicates));
    }
    return report;
}

MetricRow aggregate_metric(const std::string& param, double truth,
                           std::span<const ReplicateRow> rows,
                           std::int64_t total_replicates) {
    MetricRow row;
    row.param = param;
    row.truth = truth;
    const auto n = static_cast<double>(rows.size());
    Kahan mean, mean_sq, sd_sum, cover, len;
    for (const ReplicateRow& r : rows) {
        mean.add(r.point);
        mean_sq.add((r.point - truth) * (r.point - truth));
        sd_sum.add(r.sd);
        cover.add(r.lo <= truth && truth <= r.hi ? 1.0 : 0.0);
        len.add(r.hi - r.lo);
    }
    row.estimate = mean.sum / n;
    row.avg_sd = sd_sum.sum / n;
    row.rbias = (row.estimate - truth) / truth;
    row.rrmse = std::sqrt(mean_sq.sum / n) / truth;
    Kahan spread;
    for (const ReplicateRow& r : rows) spread.add((r.point - row.estimate) * (r.point - row.estimate));
    row.emp_sd = std::sqrt(spread.sum / n);
    row.cp = cover.sum / static_cast<double>(total_replicates);
    row.lci = len.sum / n;
    return row;
}

SimScenario preset_scenario(const std::string& table, const std::string& size, Backend backend,
                            std::int64_t replicates, std::uint64_t seed) {
    SimScenario sc;
    sc.backend = backend;
    sc.replicates = replicates;
    sc.seed = seed;
    const bool small = size == "small";
    if (size != "small" && size != "large")
        fail(Errc::unknown_preset, "scenario size must be 'small' or 'large'");

    if (table == "table1") {
        sc.truth.model = Model::basic;
        sc.truth.p_c = {0.7};
        sc.truth.p_mb = 0.2;
        sc.truth.weights = {1.0};
        sc.truth.labels = {"all"};
        sc.truth.h_total = small ? 150 : 1500;
        sc.m_total = small ? 15 : 100;
    } else if (table == "table2") {
        sc.truth.model = Model::id;
        sc.truth.p_c = {0.7};
        sc.truth.p_mb = 0.2;
        sc.truth.p_i_c = 0.8;
        sc.truth.weights = {1.0};
        sc.truth.labels = {"all"};
        sc.truth.h_total = small ? 150 : 1500;
        sc.m_total = small ? 15 : 100;
    } else if (table == "table3") {
        sc.truth.model = Model::classed;
        sc.truth.p_c = {0.9, 0.4};
        sc.truth.weights = {0.6, 0.4};
        sc.truth.labels = {"easy", "hard"};
        sc.truth.p_mb = 0.2;
        sc.truth.p_i_c = 0.8;
        sc.truth.h_total = small ? 300 : 1500;
        sc.m_total = small ? 30 : 100;
    } else {
        fail(Errc::unknown_preset, "unknown preset '" + table +
                                       "' (expected table1, table2 or table3)");
    }
    // reduced sampler settings for replicated studies
    sc.mcmc.chains = 2;
    sc.mcmc.iterations = 6000;
    sc.mcmc.burn_in = 3000;
    return sc;
}

SimScenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(Errc::io_error, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const std::exception& e) {
        fail(Errc::parse_error, path + ": " + std::string(e.what()));
    }
    SimScenario sc;
    try {
        sc.truth.model = model_from_name(j.at("model").get<std::string>());
        sc.truth.h_total = j.at("h").get<double>();
        sc.m_total = j.at("m").get<std::int64_t>();
        if (j.contains("p_mb")) sc.truth.p_mb = j["p_mb"].get<double>();
        if (j.contains("p_mb_ni")) sc.truth.p_mb = j["p_mb_ni"].get<double>();
        if (j.contains("p_i_c")) sc.truth.p_i_c = j["p_i_c"].get<double>();
        if (sc.truth.model == Model::classed) {
            sc.truth.p_c.clear();
            sc.truth.weights.clear();
            sc.truth.labels.clear();
            for (const auto& e : j.at("classes")) {
                sc.truth.p_c.push_back(e.at("p_c").get<double>());
                sc.truth.weights.push_back(e.at("weight").get<double>());
                sc.truth.labels.push_back(
                    e.value("label", "class" + std::to_string(sc.truth.labels.size() + 1)));
            }
        } else {
            sc.truth.p_c = {j.at("p_c").get<double>()};
            sc.truth.weights = {1.0};
            sc.truth.labels = {"all"};
        }
        if (j.contains("replicates")) sc.replicates = j["replicates"].get<std::int64_t>();
        if (j.contains("backend")) sc.backend = backend_from_name(j["backend"].get<std::string>());
        if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
        sc.mcmc.chains = 2;
        sc.mcmc.iterations = 6000;
        sc.mcmc.burn_in = 3000;
        if (j.contains("chains")) sc.mcmc.chains = j["chains"].get<int>();
        if (j.contains("iterations")) sc.mcmc.iterations = j["iterations"].get<int>();
        if (j.contains("burn_in")) sc.mcmc.burn_in = j["burn_in"].get<int>();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(Errc::parse_error, path + ": " + std::string(e.what()));
    }
    return sc;
}

std::string render_sim_report_csv(const SimReport& report) {
    std::ostringstream out;
    out << "method,m,parameter,true_value,estimate,sd,rbias,rrmse,cp,lci,emp_sd,failures\n";
    char buf[64];
    auto num = [&](double v, const char* fmt) {
        std::snprintf(buf, sizeof buf, fmt, v);
        return std::string(buf);
    };
    for (const auto& r : report.rows) {
        out << backend_name(report.backend) << ',' << report.m_total << ',' << r.param << ','
            << num(r.truth, "%g") << ',' << num(r.estimate, "%.4f") << ','
            << num(r.avg_sd, "%.4f") << ',' << num(r.rbias, "%.4f") << ','
            << num(r.rrmse, "%.4f") << ',' << num(r.cp, "%.4f") << ',' << num(r.lci, "%.4f")
            << ',' << num(r.emp_sd, "%.4f") << ',' << report.failures << "\n";
    }
    return out.str();
}

} // namespace plantcap
