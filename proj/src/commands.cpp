#include "mkrf/commands.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace fs = std::filesystem;

namespace mkrf {

namespace {

constexpr int exit_usage = 1;
constexpr int exit_degenerate = 2;
constexpr int exit_numerical = 4;

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

Json config_json(const FlowConfig& cfg) {
    Json j = Json::object();
    std::istringstream in(render_config(cfg));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ',')) {
        const auto b = cur.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
    }
    return out;
}

}  // namespace

FlowConfig resolve_config(const FlowConfig& in) {
    FlowConfig cfg = in;
    if (!cfg.c_is_soliton && cfg.base != "soliton") return cfg;
    const auto bg = make_background(cfg.background, cfg.grid);
    if (cfg.c_is_soliton) {
        cfg.c = find_soliton_constant(bg);
        cfg.c_is_soliton = false;
    }
    if (cfg.base == "soliton") {
        StationaryOptions opt;
        opt.seed = cfg.seed;
        const auto r = stationary_solve(bg, cfg.c, opt);
        const auto* sol = std::get_if<SolitonSolution>(&r);
        if (!sol)
            throw std::invalid_argument("base = soliton, but no soliton exists for c = " + format_double(cfg.c) +
                                        ": " + std::get<NoSoliton>(r).reason);
        cfg.base_psi = sol->state.psi();
    }
    return cfg;
}

SimulationOutcome simulate(const FlowConfig& requested, bool with_snapshots) {
    SimulationOutcome out;
    out.config = resolve_config(requested);
    const auto& cfg = out.config;
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    out.trace = run(cfg);
    const std::string csv = cfg.trace_path.empty() ? join(dir, "trace.csv") : cfg.trace_path;
    out.outputs = write_trace_bundle(csv, out.trace);
    if (with_snapshots) {
        const std::string sdir = cfg.snapshot_dir.empty() ? join(dir, "snapshots") : cfg.snapshot_dir;
        for (auto& p : write_snapshots(sdir, out.trace)) out.outputs.push_back(p);
    }
    out.exit_status = exit_code(out.trace.termination);

    Json m;
    m["version"] = MKRF_VERSION;
    m["config"] = config_json(cfg);
    m["grid"] = {{"nodes", cfg.grid}, {"regrids", out.trace.regrids}};
    m["step"] = {{"scheme", to_string(cfg.scheme)},
                 {"dt_init", cfg.dt_init},
                 {"dt_min", cfg.dt_min},
                 {"dt_max", cfg.dt_max},
                 {"safety", cfg.safety},
                 {"accepted", out.trace.steps_accepted},
                 {"rejected", out.trace.steps_rejected}};
    m["termination"] = to_string(out.trace.termination);
    m["message"] = out.trace.message;
    m["exit_status"] = out.exit_status;
    const std::string manifest = join(dir, "manifest.json");
    out.outputs.push_back(manifest);
    m["outputs"] = out.outputs;
    write_json(manifest, m);
    out.manifest = m;
    return out;
}

Json sweep(const FlowConfig& base, const std::string& parameter, const std::vector<std::string>& values,
           unsigned threads) {
    std::vector<Json> members(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            Json m = {{"value", values[i]}};
            try {
                FlowConfig cfg = base;
                apply_config_key(cfg, parameter, values[i]);
                cfg.out_dir = join(fs::path(base.out_dir), parameter + "_" + values[i]);
                cfg.trace_path.clear();
                cfg.snapshot_dir.clear();
                validate(cfg);
                auto o = simulate(cfg);
                m["exit_status"] = o.exit_status;
                m["termination"] = to_string(o.trace.termination);
                m["outputs"] = o.outputs;
                m["c"] = o.trace.c;
                if (!o.trace.records.empty()) {
                    const auto& last = o.trace.records.back();
                    m["final"] = {{"t", last.t}, {"Y_X", last.Y_X}, {"res_C0", last.res_C0}, {"res_L2", last.res_L2}};
                }
                const auto cl = classify_run(o.trace);
                m["verdict"] = to_string(cl.verdict);
                double worst = 0.0;
                for (const auto& a : audit_snapshots(o.trace)) worst = std::max(worst, a.bochner);
                m["max_bochner_residual"] = worst;
            } catch (const std::exception& e) {
                m["exit_status"] = exit_numerical;
                m["error"] = e.what();
            }
            members[i] = std::move(m);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(values.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    Json out;
    out["version"] = MKRF_VERSION;
    out["parameter"] = parameter;
    out["template"] = config_json(base);
    out["runs"] = Json::array();
    for (auto& m : members) out["runs"].push_back(std::move(m));
    if (parameter == "grid") {
        // refinement table: successive ratios of the final residuals
        Json table = Json::array();
        const Json* prev = nullptr;
        for (const auto& m : out["runs"]) {
            if (!m.contains("final")) continue;
            Json row = {{"grid", m["value"]},
                        {"res_C0", m["final"]["res_C0"]},
                        {"Y_X", m["final"]["Y_X"]},
                        {"max_bochner_residual", m["max_bochner_residual"]}};
            if (prev) {
                const double a = (*prev)["final"]["res_C0"].get<double>(), b = m["final"]["res_C0"].get<double>();
                row["res_C0_ratio"] = b > 0.0 ? a / b : 0.0;
                const double p = (*prev)["max_bochner_residual"].get<double>(), q = m["max_bochner_residual"].get<double>();
                row["bochner_ratio"] = q > 0.0 ? p / q : 0.0;
            }
            table.push_back(row);
            prev = &m;
        }
        out["refinement"] = table;
    }
    const fs::path dir(base.out_dir);
    fs::create_directories(dir);
    write_json(join(dir, "sweep_manifest.json"), out);
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Modified Kaehler-Ricci flow lab on symmetry-reduced Fano geometries"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(MKRF_VERSION));
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    unsigned threads = 1;
    auto* out_opt = app.add_option("--out-dir", out_dir, "Directory for outputs");
    auto* seed_opt = app.add_option("--seed", seed, "Seed for perturbations and multistart");
    app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::Range(1u, 256u));

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one flow from a config file");
    std::string config_path;
    std::vector<std::string> sets;
    sim->add_option("--config", config_path, "key = value config file")->required();
    sim->add_option("--set", sets, "Override a config key (key=value)");

    // soliton
    auto* sol = app.add_subcommand("soliton", "Solve for the stationary soliton");
    std::string sol_bg = "f1", sol_out;
    double sol_c = 0.0;
    std::size_t sol_grid = 129;
    sol->add_option("--background", sol_bg, "cp1 or f1")->required();
    auto* sol_c_opt = sol->add_option("--c", sol_c, "Coefficient of X (default: the soliton constant)");
    sol->add_option("--grid", sol_grid, "Grid nodes")->check(CLI::Range(std::size_t{16}, std::size_t{1025}));
    sol->add_option("--out", sol_out, "Output JSON");

    // classify
    auto* cls = app.add_subcommand("classify", "Classify a finished run");
    std::string cls_trace, cls_out;
    cls->add_option("--trace", cls_trace, "trace CSV")->required();
    cls->add_option("--out", cls_out, "Output JSON");

    // spectra
    auto* spe = app.add_subcommand("spectra", "Eigenvalues and holomorphic projections per snapshot");
    std::string spe_trace, spe_snaps, spe_out;
    spe->add_option("--trace", spe_trace, "trace CSV")->required();
    spe->add_option("--snapshots", spe_snaps, "Snapshot directory")->required();
    spe->add_option("--out", spe_out, "Output CSV");

    // report
    auto* rep = app.add_subcommand("report", "Full audit of a run");
    std::string rep_trace, rep_snaps, rep_out;
    rep->add_option("--trace", rep_trace, "trace CSV")->required();
    rep->add_option("--snapshots", rep_snaps, "Snapshot directory");
    rep->add_option("--out", rep_out, "Output JSON");

    // decay-audit
    auto* dec = app.add_subcommand("decay-audit", "Check the difference-differential decay hypothesis");
    std::string dec_series, dec_nu, dec_out;
    double dec_lambda = 1.0, dec_K0 = 0.0, dec_floor = 0.0;
    double dec_K1 = -1.0;
    AuditBand band;
    dec->add_option("--series", dec_series, "CSV with t,W columns")->required();
    dec->add_option("--lambda", dec_lambda, "lambda > 0")->required();
    dec->add_option("--nu", dec_nu, "Exponents nu_0..nu_N, e.g. 1,1 or 1/2,1/2,1")->required();
    dec->add_option("--K0", dec_K0, "Bound on W (0: from the samples)");
    dec->add_option("--K1", dec_K1, "Onset time (default 2N)");
    dec->add_option("--band-abs", band.absolute, "Absolute tolerance");
    dec->add_option("--band-rel", band.relative, "Relative tolerance");
    dec->add_option("--floor", dec_floor, "Values at or below are numerical zero");
    dec->add_option("--out", dec_out, "Output JSON");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Run a template over parameter values");
    std::string swp_config, swp_param, swp_values;
    swp->add_option("--config", swp_config, "Template config")->required();
    swp->add_option("--param", swp_param, "Config key to vary")->required();
    swp->add_option("--values", swp_values, "Comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    const fs::path dir(out_dir);
    auto emit = [&](const std::string& explicit_path, const std::string& fallback, const Json& j) {
        const std::string path = explicit_path.empty() ? join(dir, fallback) : explicit_path;
        write_json(path, j);
        std::cout << path << "\n";
    };
    auto load_trace = [&](const std::string& csv, const std::string& snaps) {
        FlowTrace tr = read_trace(csv);
        std::string sdir = snaps;
        if (sdir.empty()) {
            const auto guess = fs::path(csv).parent_path() / "snapshots";
            if (fs::is_directory(guess)) sdir = guess.string();
        }
        if (!sdir.empty())
            for (const auto& p : list_snapshots(sdir)) tr.snapshots.push_back(read_snapshot(p));
        if (tr.c == 0.0 && !tr.snapshots.empty()) tr.c = snapshot_c(list_snapshots(sdir).front());
        return tr;
    };

    try {
        if (*sim) {
            FlowConfig cfg = parse_config_file(config_path);
            for (const auto& kv : sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'", 0);
                apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            if (*seed_opt) cfg.seed = seed;
            if (*out_opt) cfg.out_dir = out_dir;
            validate(cfg);
            const auto o = simulate(cfg);
            std::cout << "termination: " << to_string(o.trace.termination);
            if (!o.trace.message.empty()) std::cout << " (" << o.trace.message << ")";
            std::cout << "\nsamples: " << o.trace.records.size() << "\n";
            for (const auto& p : o.outputs) std::cout << p << "\n";
            return o.exit_status;
        }
        if (*sol) {
            const auto bg = make_background(parse_background(sol_bg), sol_grid);
            Json j;
            double c = sol_c;
            if (!*sol_c_opt) {
                const auto rep_c = find_soliton_constant_report(bg);
                c = rep_c.c;
                j["constant"] = {{"c", rep_c.c},
                                 {"c_background", rep_c.c_background},
                                 {"refined", rep_c.refined},
                                 {"futaki_at_soliton", rep_c.futaki_at_soliton}};
            }
            StationaryOptions opt;
            opt.seed = seed;
            const auto r = stationary_solve(bg, c, opt);
            Json body = soliton_json(r);
            for (auto it = j.begin(); it != j.end(); ++it) body[it.key()] = it.value();
            emit(sol_out, "soliton.json", body);
            std::cout << body["verdict"].get<std::string>() << " c=" << format_double(c) << "\n";
            return 0;
        }
        if (*cls) {
            const FlowTrace tr = read_trace(cls_trace);
            const auto cl = classify_run(tr);
            Json j = classification_json(cl);
            if (tr.records.size() >= 10) j["c0"] = c0_json(compute_c0(tr));
            emit(cls_out, "classification.json", j);
            std::cout << to_string(cl.verdict) << "\n";
            return 0;
        }
        if (*spe) {
            const FlowTrace tr = load_trace(spe_trace, spe_snaps);
            std::vector<DifferenceInequalityRow> rows;
            try {
                rows = theorem4_audit(tr, y_floor(tr)).rows;
            } catch (const std::invalid_argument&) {
            }
            const std::string path = spe_out.empty() ? join(dir, "spectra.csv") : spe_out;
            fs::create_directories(fs::path(path).parent_path().empty() ? fs::path(".") : fs::path(path).parent_path());
            std::ofstream os(path);
            if (!os) throw std::runtime_error("cannot write '" + path + "'");
            os << "t,lambda,lambda_X,a_W,C_min\n";
            const VectorFieldSpec X{tr.c};
            for (const auto& s : tr.snapshots) {
                const auto p = modified_potential(s, X);
                const auto sp = project_holomorphic(s, X, p);
                double cmin = NAN;
                for (const auto& r : rows)
                    if (std::abs(r.t - s.time()) < 1e-6) cmin = r.c_min;
                os << format_double(s.time()) << "," << format_double(sp.lambda) << "," << format_double(sp.lambda_X)
                   << "," << format_double(sp.a_W) << "," << format_double(cmin) << "\n";
            }
            std::cout << path << "\n";
            return 0;
        }
        if (*rep) {
            const FlowTrace tr = load_trace(rep_trace, rep_snaps);
            emit(rep_out, "report.json", full_report(tr));
            return 0;
        }
        if (*dec) {
            std::vector<double> t, w;
            read_series(dec_series, t, w);
            DecayHypothesis hyp;
            hyp.lambda = dec_lambda;
            for (const auto& s : split_list(dec_nu)) hyp.nu.push_back(parse_rational(s));
            hyp.N = static_cast<int>(hyp.nu.size()) - 1;
            hyp.K0 = dec_K0;
            hyp.K1 = dec_K1 < 0.0 ? 2.0 * hyp.N : dec_K1;
            validate(hyp);
            const auto a = decay_lemma_audit(t, w, hyp, band, dec_floor);
            emit(dec_out, "decay_audit.json", decay_json(a));
            std::cout << to_string(a.kind) << "\n";
            return 0;
        }
        if (*swp) {
            FlowConfig cfg = parse_config_file(swp_config);
            if (*seed_opt) cfg.seed = seed;
            cfg.out_dir = *out_opt ? out_dir : cfg.out_dir;
            const auto values = split_list(swp_values);
            const auto known = config_keys();
            if (std::find(known.begin(), known.end(), swp_param) == known.end())
                throw ConfigError("unknown sweep parameter '" + swp_param + "'", 0);
            const Json m = sweep(cfg, swp_param, values, threads);
            std::cout << join(fs::path(cfg.out_dir), "sweep_manifest.json") << "\n";
            for (const auto& r : m["runs"])
                std::cout << swp_param << "=" << r["value"].get<std::string>() << " -> "
                          << (r.contains("verdict") ? r["verdict"].get<std::string>() : "error") << "\n";
            return 0;
        }
    } catch (const DegenerateMetric& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_degenerate;
    } catch (const NumericalFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace mkrf
