#pragma once

#include <string>
#include <vector>

#include "hardy/eigsolve.hpp"
#include "hardy/measures.hpp"
#include "hardy/quasimode.hpp"

namespace hardy::cli {

// single-scenario experiment description (JSON, versioned schema; unknown
// keys rejected)
struct RunConfig {
    int schema = 1;
    std::string scenario;
    uint64_t seed = 1;
    // mesh
    int N = 1025;
    double q = 0.5;
    double eps_min = 1e-8;
    bool has_mesh = false;
    // spectral
    int k = 1;
    double tol = 1e-10;
    double threshold = 0.0;
    bool has_spectral = false;
    // quasimode
    std::vector<double> eta_grid;
    std::vector<double> windows;
    double qm_tol = 0.02;
    bool has_quasimode = false;
    // growth
    int bins = 200;
    double growth_eps = 0.5;
    bool has_growth = false;
    // output
    std::string out_dir = "out";
    bool fmt_csv = true, fmt_json = true;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// runs the configured experiment; writes artifacts under out_dir; returns
// 0 (all checks pass), 2 (a check failed)
int run(const RunConfig& cfg);

// aggregates per-criterion artifact files (A1.json ... A10.json) from a run
// directory into summary.json; returns 0, or 1 on usage error (missing dir /
// no artifacts)
int report_bundle(const std::string& dir, std::string* summary_out = nullptr);

// serialization helpers shared by the CLI and the acceptance suite
std::string quasimode_report_json(const qm::QuasimodeReport& rep);
void write_text(const std::string& path, const std::string& text);
std::string eig_table_csv(const std::vector<eig::EigValue>& vals);
std::string growth_csv(const meas::GrowthStats& st);
void write_criterion_artifact(const std::string& dir, const std::string& id, bool pass,
                              const std::string& details);

}  // namespace hardy::cli
