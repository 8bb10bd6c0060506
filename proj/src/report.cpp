#include "shelab/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shelab/noise.hpp"

namespace shelab {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw numerical_error("cannot create directory '" + dir + "'");
}

std::string resolve_out_root(const RunConfig& cfg) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("SHELAB_OUT_DIR"); env && *env) return env;
    return "runs";
}

nlohmann::json report_header(const RunConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["generator"] = kGeneratorId;
    j["config_hash"] = cfg.config_hash;
    j["seed"] = cfg.master_seed;
    j["strict"] = cfg.scheme.strict;
    j["config"] = cfg.resolved;
    return j;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw numerical_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw numerical_error("write failed on '" + path + "'");
}

namespace {

/// Leading comment line carried by every CSV artifact.
std::string csv_provenance(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# schema=" << kSchemaVersion << " generator=" << kGeneratorId
       << " config=" << cfg.config_hash << " seed=" << cfg.master_seed << "\n";
    return os.str();
}

nlohmann::json levels_json(const OrderEstimate& est) {
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t i = 0; i < est.levels.size(); ++i) {
        const LevelResult& lr = est.levels[i];
        nlohmann::json row;
        row["level"] = i;
        row["delta"] = lr.delta;
        row["paths"] = lr.paths;
        row["error"] = lr.error;
        row["stderr"] = lr.std_error;
        row["raw_error"] = lr.raw_error;
        row["tv"] = lr.tv;
        row["excluded"] = lr.excluded;
        row["seed"] = lr.seed;
        levels.push_back(row);
    }
    return levels;
}

} // namespace

void write_order_report(const std::string& dir, const RunConfig& cfg,
                        const OrderEstimate& est,
                        const nlohmann::json& extra_fields) {
    ensure_directory(dir);
    nlohmann::json j = report_header(cfg);
    j["study"] = cfg.study_kind;
    j["metric"] = to_string(cfg.metric);
    j["status"] = est.status;
    j["slope"] = est.slope;
    j["intercept"] = est.intercept;
    j["residual"] = est.residual;
    j["used_levels"] = est.used_levels;
    j["levels"] = levels_json(est);
    for (const auto& item : extra_fields.items()) j[item.key()] = item.value();
    write_file(dir + "/report.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << csv_provenance(cfg) << "study,level,delta,metric,value,stderr\n";
    for (std::size_t i = 0; i < est.levels.size(); ++i) {
        const LevelResult& lr = est.levels[i];
        csv << cfg.study_kind << "," << i << "," << format_g17(lr.delta) << ","
            << to_string(cfg.metric) << "," << format_g17(lr.error) << ","
            << format_g17(lr.std_error) << "\n";
        if (cfg.study_kind == "density" || cfg.study_kind == "affine")
            csv << cfg.study_kind << "," << i << "," << format_g17(lr.delta)
                << ",tv," << format_g17(lr.tv) << ",\n";
    }
    write_file(dir + "/levels.csv", csv.str());
}

void write_asymptotics_report(const std::string& dir, const RunConfig& cfg,
                              const AsymptoticsResult& result) {
    ensure_directory(dir);
    nlohmann::json j = report_header(cfg);
    j["study"] = "asymptotics";
    j["status"] = "ok";
    j["deltas"] = result.deltas;
    j["max_rel_dev"] = result.max_rel_dev;
    j["u0_at_x"] = result.mu_limit;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows)
        rows.push_back({{"delta", r.delta},
                        {"z", r.z},
                        {"value", r.value},
                        {"limit", r.limit}});
    j["rows"] = rows;
    write_file(dir + "/report.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << csv_provenance(cfg) << "study,level,delta,metric,value,stderr\n";
    std::size_t level = 0;
    double last_delta = -1.0;
    for (const auto& r : result.rows) {
        if (r.delta != last_delta && last_delta >= 0.0) ++level;
        last_delta = r.delta;
        csv << "asymptotics," << level << "," << format_g17(r.delta)
            << ",scaled_logq@z=" << format_g17(r.z) << "," << format_g17(r.value)
            << ",0\n";
    }
    write_file(dir + "/rows.csv", csv.str());
}

std::string run_study_to_dir(const RunConfig& cfg, int threads,
                             const std::string& dir) {
    std::ostringstream summary;
    if (cfg.study_kind == "kernel_checks") {
        const KernelChecksReport rep = kernel_checks(cfg.master_seed, 200);
        write_kernel_checks_report(dir, cfg, rep);
        summary << "kernel_checks: repr " << rep.max_repr_diff << ", mass "
                << rep.max_neumann_mass_err << ", semigroup "
                << rep.max_semigroup_resid;
        return summary.str();
    }
    if (cfg.study_kind == "asymptotics") {
        const AsymptoticsResult res =
            asymptotics_study(cfg.model, cfg.probe_x, cfg.z_values, cfg.delta_ladder);
        write_asymptotics_report(dir, cfg, res);
        summary << "asymptotics: max relative deviation at smallest delta "
                << res.max_rel_dev.back();
        return summary.str();
    }

    LadderStudy study;
    study.model = cfg.model;
    study.scheme = cfg.scheme;
    study.probe_x = cfg.probe_x;
    study.ladder = cfg.ladder;
    study.paths_per_level = cfg.paths;
    study.f = TestFunction::parse(cfg.test_function);
    study.metric = cfg.metric;
    study.master_seed = cfg.master_seed;
    study.threads = threads;
    study.grid_points = cfg.grid_points;
    study.zeta_override = cfg.zeta_override;
    study.coupled = cfg.coupled;

    nlohmann::json extra = nlohmann::json::object();
    OrderEstimate est;
    if (cfg.study_kind == "weak") {
        est = weak_error_study(study);
    } else if (cfg.study_kind == "density") {
        est = density_error_study(study);
    } else if (cfg.study_kind == "affine") {
        est = affine_density_study(study);
        // law records: the exact target and the per-level perturbed laws
        const GaussianLaw exact = affine_exact_law(cfg.model, cfg.scheme.T, cfg.probe_x);
        extra["exact_law"] = {{"mean", exact.mean}, {"variance", exact.variance}};
        nlohmann::json laws = nlohmann::json::array();
        for (long n : cfg.ladder) {
            SchemeConfig level_cfg = cfg.scheme;
            level_cfg.N = n;
            const GaussianLaw law = affine_perturbed_law(cfg.model, level_cfg, cfg.probe_x);
            laws.push_back({{"N", n},
                            {"mean", law.mean},
                            {"variance", law.variance}});
        }
        extra["perturbed_laws"] = laws;
    } else if (cfg.study_kind == "small_drift") {
        SmallDriftStudy sd;
        sd.base_model = cfg.model;
        sd.scheme = cfg.scheme;
        sd.probe_x = cfg.probe_x;
        sd.eps_ladder = cfg.eps_ladder;
        sd.paths_per_level = cfg.paths;
        sd.f = TestFunction::parse(cfg.test_function);
        sd.master_seed = cfg.master_seed;
        sd.threads = threads;
        est = small_drift_study(sd);
    } else {
        throw std::domain_error("study: unknown kind '" + cfg.study_kind + "'");
    }
    write_order_report(dir, cfg, est, extra);
    summary << cfg.study_kind << ": status " << est.status << ", slope " << est.slope
            << " (" << est.used_levels << " levels used)";
    return summary.str();
}

void write_kernel_checks_report(const std::string& dir, const RunConfig& cfg,
                                const KernelChecksReport& report) {
    ensure_directory(dir);
    nlohmann::json j = report_header(cfg);
    j["study"] = "kernel_checks";
    j["status"] = "ok";
    j["grid_size"] = report.grid_size;
    j["residuals"] = {{"max_repr_diff", report.max_repr_diff},
                      {"max_neumann_mass_err", report.max_neumann_mass_err},
                      {"max_semigroup_resid", report.max_semigroup_resid},
                      {"dirichlet_mass_min", report.dirichlet_mass_min},
                      {"dirichlet_mass_max", report.dirichlet_mass_max}};
    write_file(dir + "/report.json", j.dump(2) + "\n");

    // diagnostic kernel table on a deterministic coarse lattice
    const KernelParams params{};
    std::ostringstream csv;
    csv << csv_provenance(cfg) << "t,x,y,bc,repr,value\n";
    for (double t : {0.01, 0.05, 0.2, 1.0}) {
        for (double x : {0.25, 0.5, 0.75}) {
            for (double y : {0.2, 0.6}) {
                for (auto bc :
                     {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
                    for (auto repr : {KernelRepr::ImageSum, KernelRepr::Spectral}) {
                        const double v = green_eval(bc, {t, x, y}, params, repr);
                        csv << format_g17(t) << "," << format_g17(x) << ","
                            << format_g17(y) << "," << to_string(bc) << ","
                            << (repr == KernelRepr::ImageSum ? "image" : "spectral")
                            << "," << format_g17(v) << "\n";
                    }
                }
            }
        }
    }
    write_file(dir + "/kernel_table.csv", csv.str());
}

} // namespace shelab
