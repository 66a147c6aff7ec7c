#include "hardy/report.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "hardy/discretize.hpp"
#include "hardy/util.hpp"

namespace hardy::cli {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const ordered_json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    const ordered_json j = ordered_json::parse(json_text);
    reject_unknown(j, {"schema", "scenario", "seed", "mesh", "spectral", "quasimode", "growth",
                       "output"},
                   "top level");
    RunConfig cfg;
    cfg.schema = j.value("schema", 1);
    if (cfg.schema != 1) throw std::invalid_argument("config: unsupported schema version");
    if (!j.contains("scenario")) throw std::invalid_argument("config: scenario required");
    cfg.scenario = j.at("scenario").get<std::string>();
    // validate against the registry before any computation
    scen::make_scenario(cfg.scenario);
    cfg.seed = j.value("seed", 1u);
    if (j.contains("mesh")) {
        const auto& m = j.at("mesh");
        reject_unknown(m, {"N", "q", "eps_min"}, "mesh");
        cfg.N = m.value("N", cfg.N);
        cfg.q = m.value("q", cfg.q);
        cfg.eps_min = m.value("eps_min", cfg.eps_min);
        cfg.has_mesh = true;
    }
    if (j.contains("spectral")) {
        const auto& s = j.at("spectral");
        reject_unknown(s, {"k", "tol", "threshold"}, "spectral");
        cfg.k = s.value("k", cfg.k);
        cfg.tol = s.value("tol", cfg.tol);
        cfg.threshold = s.value("threshold", cfg.threshold);
        cfg.has_spectral = true;
    }
    if (j.contains("quasimode")) {
        const auto& q = j.at("quasimode");
        reject_unknown(q, {"eta_grid", "windows", "tol"}, "quasimode");
        cfg.eta_grid = q.value("eta_grid", std::vector<double>{0.0});
        cfg.windows = q.value("windows", std::vector<double>{25, 50, 100, 200});
        cfg.qm_tol = q.value("tol", cfg.qm_tol);
        cfg.has_quasimode = true;
    }
    if (j.contains("growth")) {
        const auto& g = j.at("growth");
        reject_unknown(g, {"bins", "eps"}, "growth");
        cfg.bins = g.value("bins", cfg.bins);
        cfg.growth_eps = g.value("eps", cfg.growth_eps);
        cfg.has_growth = true;
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        reject_unknown(o, {"dir", "formats"}, "output");
        cfg.out_dir = o.value("dir", cfg.out_dir);
        if (o.contains("formats")) {
            cfg.fmt_csv = cfg.fmt_json = false;
            for (const auto& f : o.at("formats")) {
                if (f == "csv")
                    cfg.fmt_csv = true;
                else if (f == "json")
                    cfg.fmt_json = true;
                else
                    throw std::invalid_argument("config: unknown format");
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void write_text(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
}

std::string quasimode_report_json(const qm::QuasimodeReport& rep) {
    ordered_json j;
    j["scenario"] = rep.scenario;
    j["tol"] = rep.tol;
    j["rows"] = ordered_json::array();
    for (const auto& row : rep.rows) {
        ordered_json r;
        r["eta"] = row.eta;
        r["lambda_scenario"] = row.lambda_scenario;
        r["certified"] = row.certified;
        r["slope"] = row.slope;
        r["sup_V_last_window"] = row.supV_last;
        r["sup_Lv_last_window"] = row.supLv_last;
        r["cells"] = ordered_json::array();
        for (const auto& c : row.cells) {
            ordered_json cell;
            cell["window"] = {c.A, c.B};
            cell["ratio"] = c.ratio;
            cell["mass"] = c.mass;
            cell["terms"] = {{"bulk_Lv", c.terms.bulk_Lv},
                             {"grad_defect", c.terms.grad_defect},
                             {"cutoff1", c.terms.cutoff1},
                             {"cutoff2", c.terms.cutoff2},
                             {"potential", c.terms.potential}};
            r["cells"].push_back(cell);
        }
        j["rows"].push_back(r);
    }
    j["all_certified"] = rep.all_certified;
    return j.dump(2) + "\n";
}

std::string eig_table_csv(const std::vector<eig::EigValue>& vals) {
    CsvWriter w;
    w.row({"index", "lower", "upper", "value", "multiplicity_hint"});
    for (size_t i = 0; i < vals.size(); ++i)
        w.row({std::to_string(i + 1), format_double(vals[i].lo), format_double(vals[i].hi),
               format_double(vals[i].value), std::to_string(vals[i].mult_hint)});
    return w.buf;
}

std::string growth_csv(const meas::GrowthStats& st) {
    CsvWriter w;
    w.row({"r", "V", "S", "logV_over_r"});
    for (size_t i = 0; i < st.r.size(); ++i)
        w.row({format_double(st.r[i]), format_double(st.V[i]), format_double(st.S[i]),
               format_double(st.V[i] > 0 ? std::log(st.V[i]) / st.r[i] : 0.0)});
    return w.buf;
}

void write_criterion_artifact(const std::string& dir, const std::string& id, bool pass,
                              const std::string& details) {
    ordered_json j;
    j["criterion"] = id;
    j["pass"] = pass;
    j["details"] = details;
    write_text(dir + "/" + id + ".json", j.dump(2) + "\n");
}

int run(const RunConfig& cfg) {
    const scen::Scenario s = scen::make_scenario(cfg.scenario);
    bool all_ok = true;
    fs::create_directories(cfg.out_dir);
    ordered_json summary;
    summary["scenario"] = cfg.scenario;
    summary["seed"] = cfg.seed;

    if (cfg.has_spectral) {
        const fem::Mesh mesh = fem::scenario_mesh(s, cfg.N, cfg.q, cfg.eps_min);
        const fem::Pencil p = fem::scenario_pencil(s, mesh);
        const auto vals = eig::eig_bottom(p, cfg.k, cfg.tol);
        if (cfg.fmt_csv)
            write_text(cfg.out_dir + "/eig_" + cfg.scenario + ".csv", eig_table_csv(vals));
        summary["eig_bottom"] = vals[0].value;
        if (s.lambda0 > 0) {
            const bool ok = vals[0].value >= s.lambda0 - 1e-9;
            summary["lower_bound_ok"] = ok;
            all_ok = all_ok && ok;
        }
        if (cfg.threshold > 0) {
            const int cnt = eig::count_below(p, cfg.threshold);
            summary["count_below"] = cnt;
        }
    }
    if (cfg.has_quasimode) {
        if (!s.has_frame) throw std::invalid_argument("scenario has no frame for the probe");
        const qm::Frame f = qm::make_frame(s);
        const auto rep = qm::ess_spectrum_probe(f, cfg.eta_grid, cfg.windows, cfg.qm_tol);
        if (cfg.fmt_json)
            write_text(cfg.out_dir + "/probe_" + cfg.scenario + ".json",
                       quasimode_report_json(rep));
        if (cfg.fmt_csv) {
            CsvWriter w;
            w.row({"eta", "window_lo", "window_hi", "ratio", "certified"});
            for (const auto& row : rep.rows)
                for (const auto& c : row.cells)
                    w.row({format_double(row.eta), format_double(c.A), format_double(c.B),
                           format_double(c.ratio), row.certified ? "1" : "0"});
            write_text(cfg.out_dir + "/probe_" + cfg.scenario + ".csv", w.buf);
        }
        summary["all_certified"] = rep.all_certified;
        all_ok = all_ok && rep.all_certified;
    }
    if (cfg.has_growth) {
        if (!s.has_frame) throw std::invalid_argument("scenario has no frame for growth");
        const qm::Frame f = qm::make_frame(s);
        std::vector<double> edges;
        const double lo = f.tv_min + 0.5, hi = lo + 40.0;
        for (int b = 0; b <= cfg.bins; ++b) edges.push_back(lo + (hi - lo) * b / cfg.bins);
        auto density = [&f](double t) {
            double g = 0;
            for (const auto& z : f.tzones) g += z.density(t);
            return g;
        };
        const auto chi = meas::pushforward_density(density, edges);
        const auto st = meas::volume_growth(chi);
        if (cfg.fmt_csv) write_text(cfg.out_dir + "/growth_" + cfg.scenario + ".csv", growth_csv(st));
        const auto sig = meas::sigma_rates(s);
        ordered_json g;
        g["sigma"] = st.sigma;
        g["subexponential"] = st.subexponential;
        g["sigma0"] = sig.sigma0;
        g["sigma1"] = sig.sigma1;
        g["brooks_ok"] = sig.brooks_ok;
        g["equality_ok"] = sig.equality_ok;
        summary["growth"] = g;
        all_ok = all_ok && sig.brooks_ok;
    }
    summary["pass"] = all_ok;
    if (cfg.fmt_json)
        write_text(cfg.out_dir + "/run_" + cfg.scenario + ".json", summary.dump(2) + "\n");
    return all_ok ? 0 : 2;
}

int report_bundle(const std::string& dir, std::string* summary_out) {
    if (!fs::exists(dir)) return 1;
    ordered_json summary;
    bool any = false;
    for (int i = 1; i <= 10; ++i) {
        const std::string id = "A" + std::to_string(i);
        const fs::path p = fs::path(dir) / (id + ".json");
        if (fs::exists(p)) {
            std::ifstream in(p);
            ordered_json j = ordered_json::parse(in);
            summary[id] = j.value("pass", false) ? "pass" : "fail";
            any = true;
        } else {
            summary[id] = "not-run";
        }
    }
    if (!any) return 1;
    const std::string text = summary.dump(2) + "\n";
    write_text(dir + "/summary.json", text);
    if (summary_out) *summary_out = text;
    return 0;
}

}  // namespace hardy::cli
