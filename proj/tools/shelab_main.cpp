#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "shelab/config.hpp"
#include "shelab/numerics.hpp"
#include "shelab/parallel.hpp"
#include "shelab/report.hpp"

namespace {

using namespace shelab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitNumerical = 3;

std::string run_stamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::gmtime(&now));
    return buf;
}

RunConfig load_with_overrides(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    nlohmann::json doc;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::domain_error("config: cannot open '" + config_path + "'");
        in >> doc;
    } else {
        doc = nlohmann::json::object();
    }
    const std::regex pattern("^--([A-Za-z_][A-Za-z_0-9]*(?:\\.[A-Za-z_0-9]+)+)=(.*)$");
    for (const auto& item : overrides) {
        std::smatch m;
        if (!std::regex_match(item, m, pattern))
            throw std::domain_error("override must look like --section.key=value: '" +
                                    item + "'");
        apply_override(doc, m[1].str(), m[2].str());
    }
    return parse_config(doc);
}

std::string make_run_dir(const RunConfig& cfg, const std::string& kind) {
    const std::string root = resolve_out_root(cfg);
    const std::string base =
        root + "/" + run_stamp() + "-" + kind + "-" + cfg.config_hash.substr(0, 8);
    // append-only: never reuse an existing run directory
    std::string dir = base;
    for (int n = 2; std::filesystem::exists(dir); ++n)
        dir = base + "-" + std::to_string(n);
    ensure_directory(dir);
    return dir;
}

int cmd_simulate(const RunConfig& cfg, int threads) {
    cfg.scheme.validate(cfg.model);
    const std::string dir = make_run_dir(cfg, "simulate");

    std::ostringstream snap, ref;
    const std::string provenance = "# schema=" + std::to_string(kSchemaVersion) +
                                   " generator=" + kGeneratorId + " config=" +
                                   cfg.config_hash + " seed=" +
                                   std::to_string(cfg.master_seed) + "\n";
    snap << provenance << "path,x_j,value\n";
    ref << provenance << "path,x_j,value\n";
    std::vector<GridFunction> terminals(cfg.snapshot_paths), references(cfg.snapshot_paths);
    parallel_chunks(std::size_t(cfg.snapshot_paths), 1, threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        for (std::size_t p = begin; p < end; ++p) {
                            terminals[p] =
                                simulate_path(cfg.model, cfg.scheme, cfg.master_seed, p);
                            references[p] = simulate_reference(cfg.model, cfg.scheme,
                                                               cfg.master_seed, p);
                        }
                    });
    for (long p = 0; p < cfg.snapshot_paths; ++p) {
        for (int j = 0; j < terminals[p].size(); ++j)
            snap << p << "," << format_g17(terminals[p].node(j)) << ","
                 << format_g17(terminals[p].values[j]) << "\n";
        for (int j = 0; j < references[p].size(); ++j)
            ref << p << "," << format_g17(references[p].node(j)) << ","
                << format_g17(references[p].values[j]) << "\n";
        if (cfg.write_noise_dump) {
            const NoisePlan plan{cfg.scheme.delta(), cfg.scheme.N, cfg.scheme.K,
                                 cfg.model.bc};
            write_noise_dump(dir + "/noise-path" + std::to_string(p) + ".bin",
                             sample_increments(cfg.master_seed, p, plan));
        }
    }
    write_file(dir + "/snapshot.csv", snap.str());
    write_file(dir + "/reference.csv", ref.str());

    nlohmann::json manifest = report_header(cfg);
    manifest["command"] = "simulate";
    manifest["paths"] = cfg.snapshot_paths;
    write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
    std::cout << "simulate: wrote " << cfg.snapshot_paths << " paths to " << dir
              << " (config " << cfg.config_hash << ")\n";
    return kExitOk;
}

int cmd_study(const RunConfig& cfg, int threads) {
    const std::string dir = make_run_dir(cfg, cfg.study_kind);
    const std::string summary = run_study_to_dir(cfg, threads, dir);
    std::cout << summary << " -> " << dir << "\n";
    return kExitOk;
}

struct SelfCheck {
    std::string name;
    bool ok;
    std::string detail;
};

int cmd_selftest(const std::string& inject_fault) {
    std::vector<SelfCheck> checks;

    {
        const auto out = philox4x32_10({0u, 0u, 0u, 0u}, 0u);
        const bool ok = out[0] == 0x6627e8d5u && out[1] == 0xe169c58du &&
                        out[2] == 0xbc57ac4cu && out[3] == 0x9b00dbd8u;
        checks.push_back({"philox known-answer", ok, ""});
    }
    {
        const KernelChecksReport rep = kernel_checks(7, 40);
        const bool ok = rep.max_repr_diff <= 2e-12 &&
                        rep.max_neumann_mass_err <= 1e-12 &&
                        rep.max_semigroup_resid <= 1e-10 &&
                        rep.dirichlet_mass_min >= 0.0 &&
                      rep.dirichlet_mass_max <= 1.0 + 1e-12;
        std::ostringstream os;
        os << "repr " << rep.max_repr_diff << " mass " << rep.max_neumann_mass_err
           << " semigroup " << rep.max_semigroup_resid;
        checks.push_back({"kernel identities", ok, os.str()});
    }
    {
        const double fault = inject_fault == "vk" ? 1.0 + 1e-6 : 1.0;
        bool ok = true;
        double worst = 0.0;
        for (int k : {0, 1, 5, 20}) {
            for (double delta : {1e-3, 0.05, 0.3}) {
                const double lam = eigenvalue(k);
                const double v = fault * mode_increment_variance(lam, delta);
                const double quad = adaptive_simpson(
                    [&](double s) { return std::exp(-2.0 * lam * s); }, 0.0, delta,
                    1e-16);
                worst = std::max(worst, std::abs(v - quad));
            }
        }
        ok = worst <= 1e-13;
        std::ostringstream os;
        os << "max |v_k - quadrature| = " << worst;
        checks.push_back({"noise isometry", ok, os.str()});
    }
    {
        ModelSpec model;
        model.drift = Drift::zero();
        model.sigma = 1.0;
        model.u0 = InitialDatum::named("cospix");
        SchemeConfig config;
        config.T = 0.5;
        config.N = 16;
        config.K = 31;
        config.M = 64;
        config.ref_refinement = 3;
        double worst = 0.0;
        for (std::uint64_t p = 0; p < 8; ++p) {
            const CoupledTerminal ct = simulate_coupled_terminal(model, config, 11, p);
            for (std::size_t i = 0; i < ct.coarse.coeffs.size(); ++i)
                worst = std::max(worst,
                                 std::abs(ct.coarse.coeffs[i] - ct.fine.coeffs[i]));
        }
        std::ostringstream os;
        os << "max coefficient gap " << worst;
        checks.push_back({"drift-free coupling exactness", worst <= 1e-10, os.str()});
    }
    {
        std::vector<LevelResult> pts;
        for (long n : {8, 16, 32, 64}) {
            LevelResult lr;
            lr.delta = 1.0 / double(n);
            lr.error = 0.3 * std::sqrt(lr.delta);
            lr.std_error = 0.0;
            pts.push_back(lr);
        }
        const OrderEstimate est = fit_order(pts);
        const bool ok = est.status == "ok" && std::abs(est.slope - 0.5) <= 1e-12;
        std::ostringstream os;
        os << "slope " << format_g17(est.slope);
        checks.push_back({"order-fit fixture", ok, os.str()});
    }
    {
        // noise floor: a level with error below 3x stderr must be excluded
        std::vector<LevelResult> pts;
        for (long n : {8, 16, 32, 64}) {
            LevelResult lr;
            lr.delta = 1.0 / double(n);
            lr.error = 0.3 * std::sqrt(lr.delta);
            lr.std_error = (n == 64) ? lr.error : 1e-9;
            pts.push_back(lr);
        }
        const OrderEstimate est = fit_order(pts);
        checks.push_back({"noise-floor exclusion", est.levels.back().excluded &&
                                                       est.used_levels == 3,
                          ""});
    }

    bool all_ok = true;
    for (const auto& c : checks) {
        std::cout << (c.ok ? "[ok]   " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << "\n";
        all_ok = all_ok && c.ok;
    }
    if (!all_ok) {
        std::cout << "selftest: FAILURE\n";
        return kExitInvariant;
    }
    std::cout << "selftest: all invariants hold\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation laboratory for the stochastic heat equation on [0,1]"};
    app.require_subcommand(1);
    app.allow_extras();

    std::string config_path;
    int threads = default_thread_count();
    std::string inject_fault;

    auto* sim = app.add_subcommand("simulate", "run paths and write terminal snapshots");
    sim->add_option("-c,--config", config_path, "JSON config file");
    sim->add_option("--threads", threads, "worker pool size");
    sim->allow_extras();

    auto* study = app.add_subcommand("study", "run a configured study and write reports");
    study->add_option("-c,--config", config_path, "JSON config file");
    study->add_option("--threads", threads, "worker pool size");
    study->allow_extras();

    auto* selftest = app.add_subcommand("selftest", "fast invariant battery");
    selftest->add_option("--inject-fault", inject_fault,
                         "perturb a pinned formula to exercise failure paths");

    auto* version = app.add_subcommand("version", "print version information");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (version->parsed()) {
            std::cout << "shelab " << shelab::kToolVersion << " (schema "
                      << shelab::kSchemaVersion << ", generator "
                      << shelab::kGeneratorId << ")\n";
            return kExitOk;
        }
        if (selftest->parsed()) return cmd_selftest(inject_fault);

        CLI::App* active = sim->parsed() ? sim : study->parsed() ? study : nullptr;
        std::vector<std::string> overrides;
        if (active)
            for (const auto& extra : active->remaining()) overrides.push_back(extra);
        const RunConfig cfg = load_with_overrides(config_path, overrides);
        if (sim->parsed()) return cmd_simulate(cfg, threads);
        if (study->parsed()) return cmd_study(cfg, threads);
        return kExitUsage;
    } catch (const shelab::truncation_error& e) {
        std::cerr << "numerical error: " << e.what()
                  << " (achieved bound " << e.achieved << ")\n";
        return kExitNumerical;
    } catch (const shelab::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
