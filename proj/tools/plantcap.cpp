// Command-line front end: fit a survey, run simulation studies, reproduce the
// bundled S-Night analysis, and compare inference backends side by side.

#include "plantcap/bna.hpp"
#include "plantcap/chapman_bailey.hpp"
#include "plantcap/errors.hpp"
#include "plantcap/mcmc.hpp"
#include "plantcap/mle.hpp"
#include "plantcap/sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <algorithm>
#include <map>
#include <sstream>

using namespace plantcap;
using nlohmann::ordered_json;

#ifndef PLANTCAP_BUILD_ID
#define PLANTCAP_BUILD_ID "unknown"
#endif

namespace {

struct TextTable {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;

    std::string render() const {
        std::vector<std::size_t> widths(headers.size());
        for (std::size_t j = 0; j < headers.size(); ++j) widths[j] = headers[j].size();
        for (const auto& r : rows)
            for (std::size_t j = 0; j < r.size(); ++j) widths[j] = std::max(widths[j], r[j].size());
        std::ostringstream out;
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t j = 0; j < r.size(); ++j) {
                out << r[j] << std::string(widths[j] - r[j].size(), ' ');
                if (j + 1 < r.size()) out << "  ";
            }
            out << "\n";
        };
        line(headers);
        for (const auto& r : rows) line(r);
        return out.str();
    }
};

std::string fmt_num(double v) {
    char buf[64];
    if (std::abs(v) >= 1000.0)
        std::snprintf(buf, sizeof buf, "%.1f", v);
    else if (std::abs(v) >= 10.0)
        std::snprintf(buf, sizeof buf, "%.2f", v);
    else
        std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PLANTCAP_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            fail(Errc::bad_config, std::string("PLANTCAP_SEED is not an integer: ") + env);
        }
    }
    return 1;
}

ClassedCounts resolve_data(const std::string& spec) {
    if (spec.rfind("snight:", 0) == 0) {
        const std::string city = spec.substr(7);
        return wrap_single(snight_city(city), city);
    }
    return load_survey(spec, guess_format(spec));
}

ordered_json fit_to_json(const FitResult& fit) {
    ordered_json j;
    j["converged"] = fit.converged;
    j["h_continuous"] = fit.h_continuous;
    j["h_rounded"] = fit.h_rounded;
    j["hessian_clamped"] = fit.hessian_clamped;
    j["log_objective"] = fit.objective;
    j["params"] = ordered_json::array();
    for (const auto& p : fit.params) {
        ordered_json e;
        e["name"] = p.name;
        e["estimate"] = p.estimate;
        e["sd"] = p.sd;
        e["ci_lo"] = p.ci_lo;
        e["ci_hi"] = p.ci_hi;
        e["boundary"] = p.boundary;
        j["params"].push_back(e);
    }
    ordered_json t;
    t["name"] = fit.h_total.name;
    t["estimate"] = fit.h_total.estimate;
    t["sd"] = fit.h_total.sd;
    t["ci_lo"] = fit.h_total.ci_lo;
    t["ci_hi"] = fit.h_total.ci_hi;
    j["h_total"] = t;
    return j;
}

ordered_json mcmc_to_json(const McmcOutput& out) {
    ordered_json j;
    j["converged_ok"] = out.converged_ok;
    j["params"] = ordered_json::array();
    for (std::size_t p = 0; p < out.names.size(); ++p) {
        ordered_json e;
        e["name"] = out.names[p];
        e["median"] = out.summaries[p].median;
        e["sd"] = out.summaries[p].sd;
        e["q025"] = out.summaries[p].q025;
        e["q975"] = out.summaries[p].q975;
        e["rhat"] = out.diagnostics[p].degenerate ? 1.0 : out.diagnostics[p].rhat;
        e["ess"] = out.diagnostics[p].ess;
        e["latent"] = p >= out.n_model_params;
        j["params"].push_back(e);
    }
    return j;
}

std::string rounded_h_note(const FitResult& fit) {
    return "H rounded: " + std::to_string(fit.h_rounded) + "\n";
}

void table_from_fit(TextTable& t, const FitResult& fit, const std::string& method) {
    for (const auto& p : fit.params) {
        std::string flags;
        if (p.boundary) flags += "boundary";
        if (!fit.converged) flags += flags.empty() ? "no-converge" : ",no-converge";
        t.rows.push_back({method, p.name, fmt_num(p.estimate), fmt_num(p.sd), fmt_num(p.ci_lo),
                          fmt_num(p.ci_hi), flags});
    }
    if (fit.params.empty() || fit.params[0].name != "H")
        t.rows.push_back({method, "H", fmt_num(fit.h_total.estimate), fmt_num(fit.h_total.sd),
                          fmt_num(fit.h_total.ci_lo), fmt_num(fit.h_total.ci_hi), ""});
}

void table_from_mcmc(TextTable& t, const McmcOutput& out, const std::string& method) {
    for (std::size_t p = 0; p < out.names.size(); ++p) {
        if (p >= out.n_model_params) continue;
        const auto& s = out.summaries[p];
        const auto& d = out.diagnostics[p];
        std::string flags = d.degenerate ? "" : (d.rhat > 1.05 ? "rhat>1.05" : "");
        char rhat[32];
        std::snprintf(rhat, sizeof rhat, "%.3f", d.degenerate ? 1.0 : d.rhat);
        t.rows.push_back({method, out.names[p], fmt_num(s.median), fmt_num(s.sd), fmt_num(s.q025),
                          fmt_num(s.q975), flags.empty() ? std::string(rhat) : flags});
    }
}

struct CommonOpts {
    std::uint64_t seed = 1;
    bool seed_set = false;
    int jobs = 0;
    std::string format = "table";
    std::string out_path;
};

void emit(const CommonOpts& opts, const std::string& text) {
    if (opts.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(opts.out_path);
        if (!f) fail(Errc::io_error, "cannot write '" + opts.out_path + "'");
        f << text;
    }
}

ordered_json provenance(const std::string& command, std::uint64_t seed,
                        std::chrono::steady_clock::time_point t0) {
    ordered_json j;
    j["tool"] = "plantcap";
    j["build"] = PLANTCAP_BUILD_ID;
    j["command"] = command;
    j["seed"] = seed;
    const auto dt = std::chrono::steady_clock::now() - t0;
    j["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::microseconds>(dt).count() / 1000.0;
    return j;
}

McmcConfig mcmc_defaults_fit() { return McmcConfig{}; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"plant-capture population size estimation"};
    app.require_subcommand(1);

    std::string argv_echo;
    for (int i = 0; i < argc; ++i) argv_echo += std::string(i ? " " : "") + argv[i];
    const auto t0 = std::chrono::steady_clock::now();

    CommonOpts common;
    common.seed = 0; // resolved after parse so --seed beats the env var

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "fit one survey with one backend");
    std::string fit_model = "id", fit_method = "mle", fit_data;
    std::string dump_draws;
    McmcConfig fit_mcmc = mcmc_defaults_fit();
    fit_cmd->add_option("--model", fit_model, "basic | id | class")->capture_default_str();
    fit_cmd->add_option("--method", fit_method, "mle | mle-closed | mcmc | bna | up | cb")
        ->capture_default_str();
    fit_cmd->add_option("--data", fit_data, "survey file or snight:<city>")->required();
    fit_cmd->add_option("--chains", fit_mcmc.chains)->capture_default_str();
    fit_cmd->add_option("--iters", fit_mcmc.iterations)->capture_default_str();
    fit_cmd->add_option("--burnin", fit_mcmc.burn_in)->capture_default_str();
    fit_cmd->add_option("--thin", fit_mcmc.thin)->capture_default_str();
    fit_cmd->add_option("--dump-draws", dump_draws, "prefix for per-chain draw files");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "replicated generate-and-fit study");
    std::string sim_preset, sim_size = "large", sim_method = "mle", sim_scenario;
    std::int64_t sim_replicates = 1000;
    McmcConfig sim_mcmc;
    sim_mcmc.chains = 2;
    sim_mcmc.iterations = 6000;
    sim_mcmc.burn_in = 3000;
    sim_cmd->add_option("--preset", sim_preset, "table1 | table2 | table3");
    sim_cmd->add_option("--size", sim_size, "small | large")->capture_default_str();
    sim_cmd->add_option("--method", sim_method, "mle | bayes | bna | up")->capture_default_str();
    sim_cmd->add_option("--scenario", sim_scenario, "scenario JSON file");
    sim_cmd->add_option("--replicates", sim_replicates)->capture_default_str();
    sim_cmd->add_option("--chains", sim_mcmc.chains)->capture_default_str();
    sim_cmd->add_option("--iters", sim_mcmc.iterations)->capture_default_str();
    sim_cmd->add_option("--burnin", sim_mcmc.burn_in)->capture_default_str();

    // ---- snight ----
    auto* sn_cmd = app.add_subcommand("snight", "reproduce the S-Night analysis");
    std::string sn_city, sn_methods = "mle,mcmc", sn_baseline;
    McmcConfig sn_mcmc = mcmc_defaults_fit();
    sn_cmd->add_option("--city", sn_city, "restrict to one city");
    sn_cmd->add_option("--method", sn_methods, "comma list of mle,mcmc,bna,up")
        ->capture_default_str();
    sn_cmd->add_option("--baseline", sn_baseline, "cb adds the Chapman-Bailey block");
    sn_cmd->add_option("--chains", sn_mcmc.chains)->capture_default_str();
    sn_cmd->add_option("--iters", sn_mcmc.iterations)->capture_default_str();
    sn_cmd->add_option("--burnin", sn_mcmc.burn_in)->capture_default_str();
    auto* sn_export = sn_cmd->add_subcommand("export", "write the bundled dataset to files");
    std::string sn_dir = "snight_data", sn_fmt = "csv";
    sn_export->add_option("--dir", sn_dir)->capture_default_str();
    sn_export->add_option("--data-format", sn_fmt, "csv | json")->capture_default_str();

    // ---- compare ----
    auto* cmp_cmd = app.add_subcommand("compare", "run several backends on one dataset");
    std::string cmp_model = "id", cmp_methods = "mle,mcmc", cmp_data;
    McmcConfig cmp_mcmc = mcmc_defaults_fit();
    cmp_cmd->add_option("--model", cmp_model)->capture_default_str();
    cmp_cmd->add_option("--methods", cmp_methods, "comma list, at least two")->required();
    cmp_cmd->add_option("--data", cmp_data)->required();
    cmp_cmd->add_option("--chains", cmp_mcmc.chains)->capture_default_str();
    cmp_cmd->add_option("--iters", cmp_mcmc.iterations)->capture_default_str();
    cmp_cmd->add_option("--burnin", cmp_mcmc.burn_in)->capture_default_str();

    for (auto* cmd : {fit_cmd, sim_cmd, sn_cmd, cmp_cmd}) {
        cmd->add_option("--seed", common.seed, "RNG seed (default: $PLANTCAP_SEED or 1)")
            ->each([&](const std::string&) { common.seed_set = true; });
        cmd->add_option("--jobs", common.jobs, "worker cap (default: all cores)");
        cmd->add_option("--format", common.format, "table | record")->capture_default_str();
        cmd->add_option("--out", common.out_path, "write the report to this path");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (!common.seed_set) common.seed = default_seed();

        if (fit_cmd->parsed()) {
            const Model model = model_from_name(fit_model);
            const ClassedCounts data = resolve_data(fit_data);
            fit_mcmc.seed = common.seed;
            fit_mcmc.jobs = common.jobs;

            TextTable table;
            table.headers = {"method", "parameter", "estimate", "sd", "ci_lo", "ci_hi", "flags"};
            ordered_json results;
            std::string header;
            std::string footer;
            if (fit_method == "mle") {
                const FitResult fit = mle_numeric(model, data);
                table_from_fit(table, fit, fit_method);
                footer = rounded_h_note(fit);
                results = fit_to_json(fit);
            } else if (fit_method == "mle-closed") {
                const FitResult fit = mle_basic_closed(as_basic(data.single()));
                table_from_fit(table, fit, fit_method);
                footer = rounded_h_note(fit);
                results = fit_to_json(fit);
            } else if (fit_method == "bna") {
                const FitResult fit = bna_fit(model, data);
                table_from_fit(table, fit, fit_method);
                footer = rounded_h_note(fit);
                results = fit_to_json(fit);
            } else if (fit_method == "mcmc" || fit_method == "up") {
                const McmcOutput out = fit_method == "mcmc"
                                           ? sample_posterior(model, data, {}, fit_mcmc)
                                           : sample_posterior_up(model, data, {}, fit_mcmc);
                table_from_mcmc(table, out, fit_method);
                if (!dump_draws.empty()) export_draws(out, dump_draws);
                results = mcmc_to_json(out);
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "sampler: chains=%d iterations=%d burn_in=%d thin=%d seed=%llu\n",
                              fit_mcmc.chains, fit_mcmc.iterations, fit_mcmc.burn_in,
                              fit_mcmc.thin,
                              static_cast<unsigned long long>(fit_mcmc.seed));
                header = buf;
                if (!out.converged_ok)
                    std::cerr << "warning: split-Rhat above 1.05 on at least one parameter; "
                                 "treat the summaries with care\n";
            } else if (fit_method == "cb") {
                TextTable cb;
                cb.headers = {"treatment", "H"};
                ordered_json arr = ordered_json::array();
                for (auto [name, tr] :
                     {std::pair{"maybe_as_seen", MaybeTreatment::as_seen},
                      std::pair{"maybe_as_not_seen", MaybeTreatment::as_not_seen}}) {
                    const std::int64_t h = chapman_bailey(data.single(), tr);
                    cb.rows.push_back({name, std::to_string(h)});
                    ordered_json e;
                    e["treatment"] = name;
                    e["h"] = h;
                    arr.push_back(e);
                }
                table = std::move(cb);
                results["chapman_bailey"] = arr;
            } else {
                fail(Errc::bad_config, "unknown fit method '" + fit_method + "'");
            }

            if (common.format == "record") {
                ordered_json j = provenance(argv_echo, common.seed, t0);
                j["config"] = {{"model", fit_model}, {"method", fit_method}, {"data", fit_data}};
                if (fit_method == "mcmc" || fit_method == "up")
                    j["config"]["mcmc"] = {{"chains", fit_mcmc.chains},
                                           {"iterations", fit_mcmc.iterations},
                                           {"burn_in", fit_mcmc.burn_in},
                                           {"thin", fit_mcmc.thin}};
                j["results"] = results;
                emit(common, j.dump(2) + "\n");
            } else {
                emit(common, header + table.render() + footer);
            }
            return 0;
        }

        if (sim_cmd->parsed()) {
            SimScenario sc;
            if (!sim_scenario.empty()) {
                sc = load_scenario(sim_scenario);
                if (sim_cmd->count("--method")) sc.backend = backend_from_name(sim_method);
                if (sim_cmd->count("--replicates")) sc.replicates = sim_replicates;
                // an explicit --seed beats the file's seed
                if (sim_cmd->count("--seed")) sc.seed = common.seed;
            } else if (!sim_preset.empty()) {
                sc = preset_scenario(sim_preset, sim_size, backend_from_name(sim_method),
                                     sim_replicates, common.seed);
            } else {
                fail(Errc::bad_config, "simulate needs --preset or --scenario");
            }
            for (const char* opt : {"--chains", "--iters", "--burnin"})
                if (sim_cmd->count(opt)) {
                    sc.mcmc.chains = sim_mcmc.chains;
                    sc.mcmc.iterations = sim_mcmc.iterations;
                    sc.mcmc.burn_in = sim_mcmc.burn_in;
                    break;
                }
            sc.jobs = common.jobs;
            const SimReport report = run_study(sc);
            const std::string csv = render_sim_report_csv(report);
            if (common.format == "record") {
                ordered_json j = provenance(argv_echo, sc.seed, t0);
                j["config"] = {{"preset", sim_preset},    {"size", sim_size},
                               {"scenario", sim_scenario}, {"method", backend_name(sc.backend)},
                               {"replicates", sc.replicates}};
                j["results"]["csv"] = csv;
                j["results"]["failures"] = report.failures;
                emit(common, j.dump(2) + "\n");
            } else {
                emit(common, csv);
            }
            return 0;
        }

        if (sn_export->parsed()) {
            std::filesystem::create_directories(sn_dir);
            const SurveyFormat fmt = sn_fmt == "json" ? SurveyFormat::json : SurveyFormat::csv;
            for (const auto& [key, counts] : snight_dataset()) {
                const std::string path = sn_dir + "/snight_" + key + "." + sn_fmt;
                write_survey(path, wrap_single(counts, key), fmt);
                std::cout << "wrote " << path << "\n";
            }
            return 0;
        }

        if (sn_cmd->parsed()) {
            sn_mcmc.seed = common.seed;
            sn_mcmc.jobs = common.jobs;
            std::vector<std::string> methods;
            {
                std::istringstream ss(sn_methods);
                std::string tok;
                while (std::getline(ss, tok, ',')) methods.push_back(tok);
            }
            std::ostringstream text;
            ordered_json cities = ordered_json::array();
            for (const auto& [key, counts] : snight_dataset()) {
                if (!sn_city.empty() && key != sn_city) continue;
                const ClassedCounts data = wrap_single(counts, key);
                text << "== " << snight_display_name(key) << " (m_i=" << counts.m_i
                     << " m_yes=" << counts.m_yes << " m_mb=" << counts.m_mb
                     << " m_no=" << counts.m_no << " y=" << counts.y << ")\n";
                TextTable table;
                table.headers = {"method", "parameter", "estimate", "sd", "ci_lo", "ci_hi",
                                 "flags"};
                ordered_json per_method;
                for (const auto& method : methods) {
                    if (method == "mle") {
                        const FitResult fit = mle_numeric(Model::id, data);
                        table_from_fit(table, fit, method);
                        per_method["mle"] = fit_to_json(fit);
                    } else if (method == "bna") {
                        const FitResult fit = bna_fit(Model::id, data);
                        table_from_fit(table, fit, method);
                        per_method["bna"] = fit_to_json(fit);
                    } else if (method == "mcmc" || method == "up") {
                        const McmcOutput out =
                            method == "mcmc" ? sample_posterior(Model::id, data, {}, sn_mcmc)
                                             : sample_posterior_up(Model::id, data, {}, sn_mcmc);
                        table_from_mcmc(table, out, method);
                        per_method[method] = mcmc_to_json(out);
                    } else {
                        fail(Errc::bad_config, "unknown snight method '" + method + "'");
                    }
                }
                text << table.render() << "\n";
                ordered_json e;
                e["city"] = key;
                e["methods"] = per_method;
                cities.push_back(e);
            }
            ordered_json baseline = ordered_json::array();
            if (sn_baseline == "cb") {
                TextTable table;
                table.headers = {"city", "maybe_as_seen", "maybe_as_not_seen"};
                for (const auto& [key, counts] : snight_dataset()) {
                    if (!sn_city.empty() && key != sn_city) continue;
                    const auto seen = chapman_bailey(counts, MaybeTreatment::as_seen);
                    const auto not_seen = chapman_bailey(counts, MaybeTreatment::as_not_seen);
                    table.rows.push_back(
                        {key, std::to_string(seen), std::to_string(not_seen)});
                    ordered_json e;
                    e["city"] = key;
                    e["maybe_as_seen"] = seen;
                    e["maybe_as_not_seen"] = not_seen;
                    baseline.push_back(e);
                }
                text << "== Chapman-Bailey baseline\n" << table.render();
            }
            if (common.format == "record") {
                ordered_json j = provenance(argv_echo, common.seed, t0);
                j["config"] = {{"city", sn_city},
                               {"methods", sn_methods},
                               {"baseline", sn_baseline},
                               {"mcmc",
                                {{"chains", sn_mcmc.chains},
                                 {"iterations", sn_mcmc.iterations},
                                 {"burn_in", sn_mcmc.burn_in}}}};
                j["results"]["cities"] = cities;
                if (!baseline.empty()) j["results"]["chapman_bailey"] = baseline;
                emit(common, j.dump(2) + "\n");
            } else {
                emit(common, text.str());
            }
            return 0;
        }

        if (cmp_cmd->parsed()) {
            const Model model = model_from_name(cmp_model);
            const ClassedCounts data = resolve_data(cmp_data);
            cmp_mcmc.seed = common.seed;
            cmp_mcmc.jobs = common.jobs;
            std::vector<std::string> methods;
            std::istringstream ss(cmp_methods);
            std::string tok;
            while (std::getline(ss, tok, ',')) methods.push_back(tok);
            if (methods.size() < 2) fail(Errc::bad_config, "compare needs at least two methods");

            std::vector<std::string> param_names;
            std::map<std::string, std::map<std::string, std::string>> cells;
            ordered_json per_method;
            auto absorb = [&](const std::string& method, const FitResult& fit) {
                for (const auto& p : fit.params) {
                    if (std::find(param_names.begin(), param_names.end(), p.name) ==
                        param_names.end())
                        param_names.push_back(p.name);
                    cells[p.name][method] = fmt_num(p.estimate) + " (" + fmt_num(p.sd) + ")";
                }
                per_method[method] = fit_to_json(fit);
            };
            for (const auto& method : methods) {
                if (method == "mle") {
                    absorb(method, mle_numeric(model, data));
                } else if (method == "bna") {
                    absorb(method, bna_fit(model, data));
                } else if (method == "mcmc") {
                    absorb(method, sample_posterior(model, data, {}, cmp_mcmc).as_fit_result());
                } else if (method == "up") {
                    absorb(method, sample_posterior_up(model, data, {}, cmp_mcmc).as_fit_result());
                } else if (method == "cb") {
                    const auto seen = chapman_bailey(data.single(), MaybeTreatment::as_seen);
                    const auto not_seen =
                        chapman_bailey(data.single(), MaybeTreatment::as_not_seen);
                    if (std::find(param_names.begin(), param_names.end(), "H") ==
                        param_names.end())
                        param_names.push_back("H");
                    cells["H"][method] =
                        std::to_string(seen) + " / " + std::to_string(not_seen);
                    per_method[method] = {{"maybe_as_seen", seen},
                                          {"maybe_as_not_seen", not_seen}};
                } else {
                    fail(Errc::bad_config, "unknown compare method '" + method + "'");
                }
            }
            TextTable table;
            table.headers = {"parameter"};
            for (const auto& m : methods) table.headers.push_back(m);
            for (const auto& name : param_names) {
                std::vector<std::string> row{name};
                for (const auto& m : methods) {
                    auto it = cells[name].find(m);
                    row.push_back(it == cells[name].end() ? "-" : it->second);
                }
                table.rows.push_back(row);
            }
            if (common.format == "record") {
                ordered_json j = provenance(argv_echo, common.seed, t0);
                j["config"] = {{"model", cmp_model}, {"methods", cmp_methods}, {"data", cmp_data}};
                j["results"] = per_method;
                emit(common, j.dump(2) + "\n");
            } else {
                emit(common, table.render());
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error[" << errc_name(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
