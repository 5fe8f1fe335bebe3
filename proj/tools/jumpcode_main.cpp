// jumpcode: construct and verify detected-jump error correcting codes, print
// dimension bound tables, and run the open-system stability experiments.

#include <cstdlib>
#include <fstream>
#include <map>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jc/designs.hpp"
#include "jc/experiments.hpp"
#include "jc/jumpcodes.hpp"
#include "jc/recovery.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerification = 2;
constexpr int kExitNumeric = 3;

struct Options {
    std::string command;
    std::string code_spec;
    int d = -1;
    double phi = 0.0;
    double kappa = -1.0;
    std::string q_list, delta_kappa_list, delay_list, dead_time_list, kappa_list;
    long n_traj = 20000;
    std::uint64_t seed = 12345;
    double t_final = 0.0;
    int n_max = 12, d_max = 3;
    std::string out;
    std::string format = "csv";
    int threads = 0;
    bool timing = false;
};

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

std::string fmt12(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw CLI::ValidationError(std::string(flag) + ": cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw CLI::ValidationError(std::string(flag) + ": empty sweep list");
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::domain_error("cannot read file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// pairing(N[,phi]) | builtin-833 | path to a code or seed-family JSON file
jc::JumpCode load_code(const std::string& spec, double phi,
                       std::optional<jc::SeedFamily>* seed_out = nullptr) {
    if (spec.rfind("pairing(", 0) == 0 && spec.back() == ')') {
        const std::string args = spec.substr(8, spec.size() - 9);
        const auto comma = args.find(',');
        const int n = std::stoi(args.substr(0, comma));
        double code_phi = phi;
        if (comma != std::string::npos) code_phi = std::stod(args.substr(comma + 1));
        return jc::pairing_code(n, code_phi);
    }
    if (spec == "builtin-833") {
        const jc::SeedFamily seed = jc::construct_833();
        if (seed_out) *seed_out = seed;
        return jc::encode(seed);
    }
    const std::string text = slurp(spec);
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("codewords")) return jc::JumpCode::from_json(text);
    const jc::SeedFamily seed = jc::SeedFamily::from_json(text);
    if (seed_out) *seed_out = seed;
    return jc::encode(seed);
}

void write_text(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw std::domain_error("cannot write file: " + out_path);
    os << content;
}

// canonical key=value line for hashing; excludes anything that may not
// change the output bytes (threads, out path, timing)
std::string canonical_config(const Options& opt) {
    std::ostringstream os;
    os << "command=" << opt.command << ";code=" << opt.code_spec << ";d=" << opt.d
       << ";phi=" << fmt12(opt.phi) << ";kappa=" << fmt12(opt.kappa) << ";q=" << opt.q_list
       << ";delta-kappa=" << opt.delta_kappa_list << ";delay=" << opt.delay_list
       << ";dead-time=" << opt.dead_time_list << ";kappa-list=" << opt.kappa_list
       << ";n-traj=" << opt.n_traj << ";seed=" << opt.seed
       << ";t-final=" << fmt12(opt.t_final) << ";N=" << opt.n_max << ";d-max=" << opt.d_max
       << ";format=" << opt.format;
    return os.str();
}

nlohmann::json provenance(const Options& opt) {
    nlohmann::json j;
    j["tool_version"] = kVersion;
    j["config_hash"] = hex64(fnv1a(canonical_config(opt)));
    j["seed"] = opt.seed;
    return j;
}

void write_sidecar(const Options& opt, const jc::ImperfectionConfig& cfg) {
    if (opt.out.empty()) return;
    nlohmann::json j = nlohmann::json::parse(cfg.to_json());
    j["provenance"] = provenance(opt);
    std::ofstream os(opt.out + ".config.json");
    if (!os) throw std::domain_error("cannot write sidecar for: " + opt.out);
    os << j.dump(2) << "\n";
}

void emit_rows(const Options& opt, const std::vector<jc::ExperimentResult>& rows) {
    const std::string hash = hex64(fnv1a(canonical_config(opt)));
    if (opt.format == "json") {
        write_text(opt.out, jc::sweep_json(rows, kVersion, hash, opt.seed, opt.timing) + "\n");
    } else {
        std::ostringstream os;
        jc::write_sweep_csv(os, rows, kVersion, hash, opt.seed, opt.timing);
        write_text(opt.out, os.str());
    }
}

int cmd_construct(const Options& opt) {
    std::optional<jc::SeedFamily> seed;
    const jc::JumpCode code = load_code(opt.code_spec, opt.phi, &seed);
    nlohmann::json j = nlohmann::json::parse(code.to_json());
    j["_provenance"] = provenance(opt);
    write_text(opt.out, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_verify(const Options& opt) {
    std::optional<jc::SeedFamily> seed;
    const jc::JumpCode code = load_code(opt.code_spec, opt.phi, &seed);
    const int d = opt.d >= 0 ? opt.d : code.order;
    const double kappa = opt.kappa > 0.0 ? opt.kappa : 1.0;
    const jc::DecayModel model = jc::DecayModel::uniform(code.n_qubits, kappa);

    nlohmann::json j;
    j["code"] = jc::code_identifier(code);
    j["d"] = d;
    j["kappa"] = kappa;

    bool passed = true;
    if (seed) {
        jc::SeedFamily checked = *seed;
        checked.d = d;
        const jc::SeedCheck sc = jc::verify_seed(checked);
        passed = passed && sc.passed;
        auto lam = nlohmann::json::array();
        for (const auto& [e, frac] : sc.lambda) {
            nlohmann::json entry;
            entry["positions"] = jc::block_positions(e, code.n_qubits);
            entry["fraction"] = frac.str();
            lam.push_back(entry);
        }
        j["seed_lambda"] = lam;
        j["seed_passed"] = sc.passed;
    }

    const jc::VerificationReport report = jc::verify_code(code, d, model);
    passed = passed && report.passed;
    j["passed"] = report.passed;
    j["knill_cross_ok"] = report.knill_cross_ok;
    auto lam = nlohmann::json::array();
    for (const auto& entry : report.lambda_table) {
        nlohmann::json je;
        je["positions"] = jc::block_positions(entry.e, code.n_qubits);
        je["scaled"] = entry.scaled;
        if (entry.fraction) je["fraction"] = entry.fraction->str();
        lam.push_back(je);
    }
    j["lambda"] = lam;
    auto viol = nlohmann::json::array();
    for (const auto& v : report.violations) {
        nlohmann::json jv;
        jv["i"] = v.i;
        jv["j"] = v.j;
        jv["positions"] = jc::block_positions(v.e, code.n_qubits);
        jv["value"] = v.value;
        viol.push_back(jv);
    }
    j["violations"] = viol;
    if (report.knill_cross_witness) {
        nlohmann::json jw;
        jw["alpha"] = report.knill_cross_witness->alpha;
        jw["beta"] = report.knill_cross_witness->beta;
        jw["i"] = report.knill_cross_witness->i;
        jw["j"] = report.knill_cross_witness->j;
        jw["value"] = report.knill_cross_witness->value;
        j["knill_cross_witness"] = jw;
    }
    j["_provenance"] = provenance(opt);
    write_text(opt.out, j.dump(2) + "\n");
    return passed ? kExitOk : kExitVerification;
}

int cmd_bounds(const Options& opt) {
    std::ostringstream os;
    os << "# jumpcode " << kVersion << "\n";
    os << "# config-hash " << hex64(fnv1a(canonical_config(opt))) << "\n";
    os << "# seed " << opt.seed << "\n";
    os << "N,w,d,upper_bound,achieved,construction\n";
    for (int n = 1; n <= opt.n_max; ++n) {
        for (int d = 0; d <= opt.d_max; ++d) {
            for (int w = d; w <= n; ++w) {
                os << n << "," << w << "," << d << "," << jc::upper_bound(n, w, d);
                if (d == 0) {
                    os << "," << jc::detail::binomial(n, w) << ",weight-class";
                } else if (d == 1 && n % 2 == 0 && w == n / 2) {
                    os << "," << jc::detail::binomial(n - 1, n / 2 - 1) << ",pairing";
                } else if (n == 8 && w == 4 && d <= 3 && d >= 1) {
                    os << "," << 3 << ",builtin-833";
                } else {
                    os << ",,";
                }
                os << "\n";
            }
        }
    }
    write_text(opt.out, os.str());
    return kExitOk;
}

int cmd_memory(const Options& opt) {
    const jc::JumpCode code = load_code(opt.code_spec, opt.phi);
    const double kappa = opt.kappa > 0.0 ? opt.kappa : 1.0;
    const std::vector<double> qs =
        opt.q_list.empty() ? std::vector<double>{0.0} : parse_list(opt.q_list, "--q");
    jc::RunOptions run;
    run.threads = opt.threads;
    std::vector<jc::ExperimentResult> rows;
    for (double q : qs)
        rows.push_back(jc::memory_misdetection(code, q, kappa, opt.t_final, opt.n_traj,
                                               opt.seed, run));
    emit_rows(opt, rows);
    jc::ImperfectionConfig cfg;
    cfg.q = qs.back();
    cfg.kappa_mean = kappa;
    write_sidecar(opt, cfg);
    return kExitOk;
}

int cmd_grover_rates(const Options& opt) {
    const jc::JumpCode code = load_code(opt.code_spec, opt.phi);
    const double kappa = opt.kappa > 0.0 ? opt.kappa : 1.0;
    const std::vector<double> spreads =
        opt.delta_kappa_list.empty()
            ? std::vector<double>{0.0}
            : parse_list(opt.delta_kappa_list, "--delta-kappa");
    jc::RunOptions run;
    run.threads = opt.threads;
    std::vector<jc::ExperimentResult> rows;
    for (double dk : spreads) {
        rows.push_back(jc::grover_unequal_rates(code, kappa, dk, opt.n_traj, opt.seed, true,
                                                run));
        rows.push_back(jc::grover_unequal_rates(code, kappa, dk, opt.n_traj, opt.seed, false,
                                                run));
    }
    emit_rows(opt, rows);
    jc::ImperfectionConfig cfg;
    cfg.delta_kappa = spreads.back();
    cfg.kappa_mean = kappa;
    write_sidecar(opt, cfg);
    return kExitOk;
}

int cmd_grover_delay(const Options& opt) {
    const jc::JumpCode code = load_code(opt.code_spec, opt.phi);
    const double kappa = opt.kappa > 0.0 ? opt.kappa : 0.5;
    const std::vector<double> delays =
        opt.delay_list.empty() ? std::vector<double>{0.0}
                               : parse_list(opt.delay_list, "--delay");
    jc::RunOptions run;
    run.threads = opt.threads;
    std::vector<jc::ExperimentResult> rows;
    for (double delay : delays)
        rows.push_back(jc::grover_delay(code, kappa, delay, opt.n_traj, opt.seed, run));
    emit_rows(opt, rows);
    jc::ImperfectionConfig cfg;
    cfg.delay = delays.back();
    cfg.kappa_mean = kappa;
    write_sidecar(opt, cfg);
    return kExitOk;
}

int cmd_grover_deadtime(const Options& opt) {
    const jc::JumpCode code = load_code(opt.code_spec, opt.phi);
    const std::vector<double> kappas =
        opt.kappa_list.empty()
            ? std::vector<double>{opt.kappa > 0.0 ? opt.kappa : 0.5}
            : parse_list(opt.kappa_list, "--kappa-list");
    const std::vector<double> windows =
        opt.dead_time_list.empty() ? std::vector<double>{0.0}
                                   : parse_list(opt.dead_time_list, "--dead-time");
    jc::RunOptions run;
    run.threads = opt.threads;
    std::vector<jc::ExperimentResult> rows;
    for (double kappa : kappas)
        for (double dead : windows)
            rows.push_back(jc::grover_deadtime(code, kappa, dead, opt.n_traj, opt.seed, run));
    emit_rows(opt, rows);
    jc::ImperfectionConfig cfg;
    cfg.dead_time = windows.back();
    cfg.kappa_mean = kappas.back();
    write_sidecar(opt, cfg);
    return kExitOk;
}

int cmd_trajectory_check(const Options& opt) {
    const jc::JumpCode code = load_code(opt.code_spec, opt.phi);
    const double kappa = opt.kappa > 0.0 ? opt.kappa : 1.0;
    const jc::DecayModel model = jc::DecayModel::uniform(code.n_qubits, kappa);
    const double tau =
        opt.t_final > 0.0 ? opt.t_final : 0.5 * std::numbers::pi / kappa;

    const jc::RecoveryTable table = jc::build_recovery_table(code, model);
    const jc::StateVector psi0 = jc::uniform_code_state(code);
    const jc::SparseOperator h0(code.n_qubits);
    jc::PerfectRecoveryHandler handler(&table);
    jc::EnsembleOptions eopts;
    eopts.threads = opt.threads;
    eopts.accumulate_rho = true;
    const jc::EnsembleResult ens =
        jc::ensemble_average(psi0, h0, model, tau, handler, opt.n_traj, opt.seed, eopts);

    const jc::JumpDressing dressing = jc::recovery_dressing(code, model);
    const jc::DensityMatrix rho_master =
        jc::integrate_master(jc::DensityMatrix::pure(psi0), h0, model, &dressing, tau,
                             jc::default_master_dt(0.0, model));

    double worst = 0.0, worst_allowed = 0.0;
    bool ok = true;
    for (Eigen::Index r = 0; r < rho_master.dim(); ++r)
        for (Eigen::Index c = 0; c < rho_master.dim(); ++c) {
            const double dev = std::abs(ens.rho_estimate->mat(r, c) - rho_master.mat(r, c));
            const double allowed = 5.0 * (*ens.rho_std_error)(r, c) + 1e-9;
            if (dev > worst) {
                worst = dev;
                worst_allowed = allowed;
            }
            if (dev > allowed) ok = false;
        }

    std::ostringstream os;
    os << "# jumpcode " << kVersion << "\n";
    os << "# config-hash " << hex64(fnv1a(canonical_config(opt))) << "\n";
    os << "# seed " << opt.seed << "\n";
    os << "code " << jc::code_identifier(code) << "\n";
    os << "n_traj " << ens.n_traj << "\n";
    os << "mean_fidelity " << fmt12(ens.mean_fidelity) << "\n";
    os << "max_entry_deviation " << fmt12(worst) << "\n";
    os << "allowance_at_max " << fmt12(worst_allowed) << "\n";
    os << "consistent " << (ok ? "yes" : "no") << "\n";
    write_text(opt.out, os.str());
    return ok ? kExitOk : kExitNumeric;
}

// Flat `key = value` configuration grammar: one pair per line, '#' starts a
// comment, values may be double-quoted. Each key names a long flag of the
// invoked command. Values given on the command line take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") config_path = args[i + 1];
    for (const auto& a : args)
        if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    if (config_path.empty() || args.size() < 2) return args;

    std::ifstream in(config_path);
    if (!in) throw std::domain_error("cannot read config file: " + config_path);
    std::vector<std::string> from_file;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::domain_error("config: empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (value == "true") {
            from_file.push_back("--" + key);
        } else if (value == "false") {
            continue;
        } else {
            from_file.push_back("--" + key);
            from_file.push_back(value);
        }
    }
    // program, subcommand, config-derived args, then explicit flags (take-last)
    std::vector<std::string> out = {args[0], args[1]};
    out.insert(out.end(), from_file.begin(), from_file.end());
    out.insert(out.end(), args.begin() + 2, args.end());
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"detected jump-error correcting code toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Options opt;
    const char* env_seed = std::getenv("JUMPCODE_SEED");
    if (env_seed) opt.seed = std::strtoull(env_seed, nullptr, 10);

    std::map<const CLI::App*, std::pair<CLI::Option*, std::string>> code_defaults;
    std::string config_path_sink;
    auto add_common = [&](CLI::App* cmd, const char* default_code) {
        cmd->add_option("--config", config_path_sink,
                        "flat key = value configuration file; flags override it");
        CLI::Option* code_opt = cmd->add_option(
            "--code", opt.code_spec, "pairing(N[,phi]) | builtin-833 | JSON file path");
        code_defaults[cmd] = {code_opt, default_code};
        cmd->add_option("--phi", opt.phi, "pairing phase (radians)");
        cmd->add_option("--seed", opt.seed, "master random seed")->envname("JUMPCODE_SEED");
        cmd->add_option("--out", opt.out, "output path (default: stdout)");
        cmd->add_option("--format", opt.format, "csv | json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
        cmd->add_flag("--timing", opt.timing, "include wall times in output");
    };

    auto* construct = app.add_subcommand("construct", "build a code and emit its JSON");
    add_common(construct, "pairing(4)");

    auto* verify = app.add_subcommand("verify", "check the correction conditions");
    add_common(verify, "pairing(4)");
    verify->add_option("--d", opt.d, "detection order to check");
    verify->add_option("--kappa", opt.kappa, "uniform decay rate");

    auto* bounds = app.add_subcommand("bounds", "dimension bound table");
    add_common(bounds, "pairing(4)");
    bounds->add_option("--N", opt.n_max, "largest qubit count");
    bounds->add_option("--d", opt.d_max, "largest detection order");

    auto* memory = app.add_subcommand("memory", "quantum memory with misdetection");
    add_common(memory, "pairing(4)");
    memory->add_option("--q", opt.q_list, "comma separated misdetection parameters");
    memory->add_option("--kappa", opt.kappa, "uniform decay rate");
    memory->add_option("--n-traj", opt.n_traj, "trajectories per point");
    memory->add_option("--t-final", opt.t_final, "horizon (default pi/(2 kappa))");

    auto* rates = app.add_subcommand("grover-rates", "Rabi dynamics with rate spread");
    add_common(rates, "pairing(6)");
    rates->add_option("--delta-kappa", opt.delta_kappa_list,
                      "comma separated rate spreads (units of the Rabi frequency)");
    rates->add_option("--kappa", opt.kappa, "mean decay rate");
    rates->add_option("--n-traj", opt.n_traj, "rate-vector samples per point");

    auto* delay = app.add_subcommand("grover-delay", "Rabi dynamics with recovery delay");
    add_common(delay, "pairing(6)");
    delay->add_option("--delay", opt.delay_list, "comma separated delays");
    delay->add_option("--kappa", opt.kappa, "uniform decay rate (default 0.5)");
    delay->add_option("--n-traj", opt.n_traj, "trajectories per point");

    auto* dead = app.add_subcommand("grover-deadtime", "Rabi dynamics with detector dead time");
    add_common(dead, "pairing(6)");
    dead->add_option("--dead-time", opt.dead_time_list, "comma separated blind windows");
    dead->add_option("--kappa", opt.kappa, "mean decay rate (default 0.5)");
    dead->add_option("--kappa-list", opt.kappa_list, "comma separated mean rates");
    dead->add_option("--n-traj", opt.n_traj, "trajectories per point");

    auto* check = app.add_subcommand("trajectory-check",
                                     "trajectory ensemble against the master equation");
    add_common(check, "pairing(4)");
    check->add_option("--kappa", opt.kappa, "uniform decay rate");
    check->add_option("--n-traj", opt.n_traj, "trajectories");
    check->add_option("--t-final", opt.t_final, "horizon (default pi/(2 kappa))");

    // command-line values override config-file values
    for (CLI::App* cmd : app.get_subcommands(nullptr))
        for (CLI::Option* o : cmd->get_options())
            if (o->get_expected_min() > 0) o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::vector<const char*> ptrs;
        ptrs.reserve(args.size());
        for (const auto& a : args) ptrs.push_back(a.c_str());
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    // per-command default code when --code was not given
    for (const auto& [cmd, entry] : code_defaults)
        if (cmd->parsed() && entry.first->count() == 0) opt.code_spec = entry.second;

    try {
        if (construct->parsed()) {
            opt.command = "construct";
            return cmd_construct(opt);
        }
        if (verify->parsed()) {
            opt.command = "verify";
            return cmd_verify(opt);
        }
        if (bounds->parsed()) {
            opt.command = "bounds";
            return cmd_bounds(opt);
        }
        if (memory->parsed()) {
            opt.command = "memory";
            return cmd_memory(opt);
        }
        if (rates->parsed()) {
            opt.command = "grover-rates";
            return cmd_grover_rates(opt);
        }
        if (delay->parsed()) {
            opt.command = "grover-delay";
            return cmd_grover_delay(opt);
        }
        if (dead->parsed()) {
            opt.command = "grover-deadtime";
            return cmd_grover_deadtime(opt);
        }
        if (check->parsed()) {
            opt.command = "trajectory-check";
            return cmd_trajectory_check(opt);
        }
        std::cerr << "no command given\n";
        return kExitConfig;
    } catch (const jc::numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const jc::condition_violation& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kExitVerification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
