#include "mcf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcf/entropy.hpp"
#include "mcf/flowsim.hpp"
#include "mcf/io.hpp"
#include "mcf/shooting.hpp"
#include "mcf/stability.hpp"

namespace mcf::cli {

namespace {

using ojson = nlohmann::ordered_json;

const std::map<std::string, std::set<std::string>>& allowed_params() {
    static const std::map<std::string, std::set<std::string>> table = {
        {"shoot", {"family", "a", "n", "r_max"}},
        {"mcurve", {"family", "n", "a_min", "a_max", "samples", "refine"}},
        {"find", {"family", "n", "slope", "a_min", "a_max", "samples"}},
        {"entropy", {"mode", "n", "m_plus", "m_minus", "p", "grid"}},
        {"eigen", {"family", "a", "n", "truncation", "h", "epsilon"}},
        {"flow",
         {"family", "a", "n", "gauge", "epsilon", "horizon", "nodes", "domain",
          "cadence", "line_rates", "m_plus"}},
        {"report", {"dirs"}},
    };
    return table;
}

std::map<std::string, std::string> default_params(const std::string& sub) {
    if (sub == "shoot")
        return {{"family", "triple"}, {"a", "1"}, {"n", "2"}, {"r_max", "0"}};
    if (sub == "mcurve")
        return {{"family", "triple"}, {"n", "2"},      {"a_min", "0.05"},
                {"a_max", "20"},      {"samples", "64"}, {"refine", "true"}};
    if (sub == "find")
        return {{"family", "triple"}, {"n", "2"},        {"slope", "4"},
                {"a_min", "0.05"},    {"a_max", "20"},   {"samples", "33"}};
    if (sub == "entropy")
        return {{"mode", "cone"}, {"n", "2"}, {"m_plus", "1"},
                {"m_minus", "1"}, {"p", "1"}, {"grid", "0.25,0.5,1"}};
    if (sub == "eigen")
        return {{"family", "connected"}, {"a", "0.5"},       {"n", "2"},
                {"truncation", "12"},    {"h", "0.01"},      {"epsilon", "0"}};
    if (sub == "flow")
        return {{"family", "connected"}, {"a", "0.5"},     {"n", "2"},
                {"gauge", "rescaled"},   {"epsilon", "0"}, {"horizon", "1"},
                {"nodes", "601"},        {"domain", "12"}, {"cadence", "0.1"},
                {"line_rates", "false"}, {"m_plus", "0"}};
    if (sub == "report") return {{"dirs", ""}};
    throw DomainError("bad-subcommand", "unknown subcommand: " + sub);
}

void validate_params(const std::string& sub,
                     const std::map<std::string, std::string>& params) {
    const auto& table = allowed_params();
    const auto it = table.find(sub);
    if (it == table.end())
        throw DomainError("bad-subcommand", "unknown subcommand: " + sub);
    for (const auto& [k, v] : params)
        if (!it->second.count(k))
            throw DomainError("unknown-field",
                              "unknown parameter for " + sub + ": " + k);
}

double pnum(const std::map<std::string, std::string>& params, const std::string& k) {
    const std::string& s = params.at(k);
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw DomainError("bad-value", "parameter " + k + " is not a number: " + s);
    }
    if (pos != s.size())
        throw DomainError("bad-value", "parameter " + k + " is not a number: " + s);
    return v;
}

int pint(const std::map<std::string, std::string>& params, const std::string& k) {
    const double v = pnum(params, k);
    if (v != std::floor(v))
        throw DomainError("bad-value", "parameter " + k + " is not an integer");
    return static_cast<int>(v);
}

bool pbool(const std::map<std::string, std::string>& params, const std::string& k) {
    const std::string& s = params.at(k);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw DomainError("bad-value", "parameter " + k + " is not a boolean: " + s);
}

std::vector<double> plist(const std::map<std::string, std::string>& params,
                          const std::string& k) {
    std::vector<double> out;
    std::stringstream ss(params.at(k));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty())
        throw DomainError("bad-value", "parameter " + k + " lists no values");
    return out;
}

std::string jesc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string canon_value(const ojson& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return io::fmt(v.get<double>());
    if (v.is_array()) {
        std::string out;
        for (const auto& e : v) {
            if (!e.is_number())
                throw DomainError("bad-value", "parameter " + key +
                                                   " mixes non-numeric list entries");
            if (!out.empty()) out.push_back(',');
            out += io::fmt(e.get<double>());
        }
        return out;
    }
    throw DomainError("bad-value", "unsupported value type for parameter " + key);
}

// ---- run output collection ----

struct RunWriter {
    std::string dir;
    std::vector<std::pair<std::string, std::string>> files;

    void emit(const std::string& path, const std::string& content) {
        files.emplace_back(path, content);
    }
};

void finalize_run(const RunConfig& c, RunWriter& w, long long wall_ms) {
    namespace fs = std::filesystem;
    fs::create_directories(w.dir);
    RunManifest m;
    m.config = c;
    m.config_hash = io::fnv1a_hex(serialize_run_config(c));
    m.wall_time_ms = wall_ms;
    for (const auto& [path, content] : w.files) {
        io::write_file((fs::path(w.dir) / path).string(), content);
        m.files.push_back({path, io::fnv1a_hex(content)});
    }
    io::write_file((fs::path(w.dir) / "manifest.json").string(),
                   serialize_manifest(m));
}

// ---- subcommand implementations ----

IntegrateOptions profile_opts() {
    IntegrateOptions io;
    io.max_step = 0.05;
    io.max_steps = 40'000'000;
    return io;
}

Profile load_profile(const RunConfig& c, double default_tol, double r_max) {
    const auto family = family_from_string(c.params.at("family"));
    const double a = pnum(c.params, "a");
    const int n = pint(c.params, "n");
    const double tol = c.tol > 0 ? c.tol : default_tol;
    return integrate_profile(family, a, n, r_max, tol, profile_opts());
}

void run_shoot(const RunConfig& c, RunWriter& w) {
    const auto family = family_from_string(c.params.at("family"));
    const double a = pnum(c.params, "a");
    const int n = pint(c.params, "n");
    double r_max = pnum(c.params, "r_max");
    if (r_max <= 0) r_max = 50.0 * std::max(1.0, a);
    const double tol = c.tol > 0 ? c.tol : 1e-10;
    IntegrateOptions io;
    io.max_steps = 40'000'000;
    const Profile p = integrate_profile(family, a, n, r_max, tol, io);
    const SlopeEstimate s = asymptotic_slope(p);
    w.emit("profile.csv", profile_csv(p));
    w.emit("profile.json", profile_meta_json(p, s));
}

TraceOptions trace_opts(const RunConfig& c) {
    TraceOptions t;
    if (c.tol > 0) t.map.tol = c.tol;
    return t;
}

void run_mcurve(const RunConfig& c, RunWriter& w) {
    const auto family = family_from_string(c.params.at("family"));
    const auto curve = trace_slope_curve(
        family, pint(c.params, "n"), pnum(c.params, "a_min"),
        pnum(c.params, "a_max"), pint(c.params, "samples"),
        pbool(c.params, "refine"), trace_opts(c));
    w.emit("curve.csv", slope_curve_csv(curve));
}

void run_find(const RunConfig& c, RunWriter& w) {
    const auto family = family_from_string(c.params.at("family"));
    const auto curve = trace_slope_curve(
        family, pint(c.params, "n"), pnum(c.params, "a_min"),
        pnum(c.params, "a_max"), pint(c.params, "samples"), true, trace_opts(c));
    const auto roots = find_profiles_for_slope(pnum(c.params, "slope"), curve);
    w.emit("curve.csv", slope_curve_csv(curve));
    w.emit("roots.json", root_set_json(roots));
}

void run_entropy(const RunConfig& c, RunWriter& w) {
    const std::string mode = c.params.at("mode");
    const int n = pint(c.params, "n");
    if (mode == "cone") {
        ConeSpec cone;
        cone.n = n;
        cone.m_plus = pnum(c.params, "m_plus");
        cone.m_minus = pnum(c.params, "m_minus");
        EntropySearchOptions opts;
        if (c.tol > 0) opts.quad.rel_tol = c.tol;
        w.emit("entropy.json", entropy_report_json(entropy_cone(cone, opts)));
    } else if (mode == "scan") {
        const auto grid = plist(c.params, "grid");
        std::ostringstream ss;
        ss << "m_plus,m_minus,lambda,t,d,err\n";
        for (double mp : grid)
            for (double mm : grid) {
                if (mm < mp) continue;
                ConeSpec cone;
                cone.n = n;
                cone.m_plus = mp;
                cone.m_minus = mm;
                const auto rep = entropy_cone(cone);
                ss << io::fmt(mp) << ',' << io::fmt(mm) << ',' << io::fmt(rep.lambda)
                   << ',' << io::fmt(rep.argmax.t) << ',' << io::fmt(rep.argmax.d)
                   << ',' << io::fmt(rep.quad_error + rep.opt_error) << '\n';
            }
        w.emit("scan.csv", ss.str());
    } else if (mode == "simons") {
        w.emit("simons.json",
               simons_density_json(simons_density(n, pint(c.params, "p"))));
    } else {
        throw DomainError("bad-value", "entropy mode must be cone, scan or simons");
    }
}

double rayleigh_residual(const OperatorPencil& pc, const EigenResult& res) {
    // reduced coordinates v = M^{1/2} f; residual of the Rayleigh quotient of
    // the mass-scaled tridiagonal against the bisection eigenvalue
    const std::size_t N = pc.diag.size();
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i)
        v[i] = std::exp(0.5 * pc.log_mass[i]) * res.f[i];
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double tv = pc.diag[i] * v[i];
        if (i > 0) tv += pc.off[i - 1] * v[i - 1];
        if (i + 1 < N) tv += pc.off[i] * v[i + 1];
        num += v[i] * tv;
        den += v[i] * v[i];
    }
    return std::abs(num / den - res.mu1);
}

EigenResult sup_normalized(EigenResult res) {
    double fmax = 0.0;
    for (double v : res.f) fmax = std::max(fmax, v);
    for (double& v : res.f) v /= fmax;
    for (double& v : res.log_f) v -= std::log(fmax);
    return res;
}

void run_eigen(const RunConfig& c, RunWriter& w) {
    const Profile p = load_profile(c, 1e-11, 15.0);
    AssembleOptions ao;
    ao.truncation = pnum(c.params, "truncation");
    ao.h = pnum(c.params, "h");
    const auto pencil = assemble_operator(p, ao);
    const auto res = lowest_eigenpair(pencil);

    // grid-halving diagnostic: Richardson pairs at h, h/2, h/4
    AssembleOptions a2 = ao, a4 = ao;
    a2.h = ao.h / 2;
    a4.h = ao.h / 4;
    const double mu_h = res.mu1;
    const double mu_2 = lowest_eigenpair(assemble_operator(p, a2)).mu1;
    const double mu_4 = lowest_eigenpair(assemble_operator(p, a4)).mu1;
    const double ex1 = (4 * mu_2 - mu_h) / 3;
    const double ex2 = (4 * mu_4 - mu_2) / 3;

    std::ostringstream ss;
    ss << "{\"mu1\":" << io::fmt(res.mu1) << ",\"norm\":" << io::fmt(res.norm)
       << ",\"truncation\":" << io::fmt(res.truncation)
       << ",\"rayleigh_residual\":" << io::fmt(rayleigh_residual(pencil, res))
       << ",\"mu1_extrap_delta\":" << io::fmt(std::abs(ex2 - ex1));
    if (res.mu1 < 0) {
        const auto env = decay_envelope_check(res, p.n);
        ss << ",\"envelope_C\":" << io::fmt(env.C)
           << ",\"beta\":" << io::fmt(env.beta)
           << ",\"envelope_pass\":" << (env.pass ? "true" : "false")
           << ",\"envelope_C_trunc\":[";
        bool first = true;
        for (double trunc : {ao.truncation - 1, ao.truncation, ao.truncation + 1}) {
            AssembleOptions at = ao;
            at.truncation = trunc;
            const auto rt = lowest_eigenpair(assemble_operator(p, at));
            if (!first) ss << ',';
            first = false;
            ss << io::fmt(decay_envelope_check(rt, p.n).C);
        }
        ss << ']';
    }
    ss << "}\n";
    w.emit("eigen.json", ss.str());
    w.emit("eigenfunction.csv", eigen_csv(res));

    const double eps = pnum(c.params, "epsilon");
    if (eps > 0) {
        const auto unit = sup_normalized(res);
        std::vector<double> errs;
        std::ostringstream ls;
        ls << "{\"epsilons\":[";
        for (int k = 0; k < 3; ++k) {
            const double e = eps * std::pow(10.0, -k);
            const auto E = normal_graph_expander_E(p, unit, e);
            double err = 0.0;
            for (std::size_t i = 0; i < E.size(); ++i)
                err = std::max(err, std::abs(E[i] / e - unit.mu1 * unit.f[i]));
            errs.push_back(err);
            ls << (k ? "," : "") << io::fmt(e);
        }
        ls << "],\"sup_errors\":[";
        for (int k = 0; k < 3; ++k) ls << (k ? "," : "") << io::fmt(errs[k]);
        ls << "],\"order\":" << io::fmt(0.5 * std::log10(errs[0] / errs[2]))
           << "}\n";
        w.emit("linearization.json", ls.str());
    }
}

std::string snap_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%04zu.csv", k);
    return buf;
}

std::string tube_json(const FlowTrace& trace, const ConeSpec& cone) {
    bool pass = true;
    double n_prime = 0.0, min_margin = 1.0;
    for (const auto& s : trace.snapshots) {
        const auto rep = cone_tube_check(s, cone);
        pass = pass && rep.pass;
        n_prime = std::max(n_prime, rep.n_prime);
        min_margin = std::min(min_margin, rep.margin);
    }
    std::ostringstream ss;
    ss << "{\"pass\":" << (pass ? "true" : "false")
       << ",\"n_prime\":" << io::fmt(n_prime)
       << ",\"min_margin\":" << io::fmt(min_margin)
       << ",\"snapshots\":" << trace.snapshots.size() << "}\n";
    return ss.str();
}

void run_flow(const RunConfig& c, RunWriter& w) {
    const Profile p = load_profile(c, 1e-11, 15.0);
    const double eps = pnum(c.params, "epsilon");
    const double horizon = pnum(c.params, "horizon");
    const auto gauge = c.params.at("gauge") == "physical" ? FlowGauge::Physical
                       : c.params.at("gauge") == "rescaled"
                           ? FlowGauge::Rescaled
                           : throw DomainError("bad-value",
                                               "gauge must be rescaled or physical");

    if (pbool(c.params, "line_rates")) {
        AssembleOptions ao;
        ao.truncation = 12.0;
        ao.h = 0.01;
        const auto res = sup_normalized(lowest_eigenpair(assemble_operator(p, ao)));
        const auto fl =
            flow_line_experiment(p, res, eps > 0 ? eps : 1e-4, horizon);
        std::ostringstream ss;
        ss << "{\"mu1\":" << io::fmt(res.mu1)
           << ",\"rate_outward\":" << io::fmt(fl.rate_outward)
           << ",\"rate_inward\":" << io::fmt(fl.rate_inward)
           << ",\"r2_outward\":" << io::fmt(fl.r2_outward)
           << ",\"r2_inward\":" << io::fmt(fl.r2_inward) << "}\n";
        w.emit("rates.json", ss.str());
        return;
    }

    Profile init = p;
    if (eps != 0.0) {
        AssembleOptions ao;
        ao.truncation = 12.0;
        ao.h = 0.01;
        const auto res = sup_normalized(lowest_eigenpair(assemble_operator(p, ao)));
        init = perturb_profile(p, sample_eigenfunction(res, p), eps);
    }
    const auto st = flow_state_from_profile(init, pnum(c.params, "domain"),
                                            pint(c.params, "nodes"), gauge);
    EvolveOptions eo;
    eo.snapshot_cadence = pnum(c.params, "cadence");
    const auto trace = evolve(st, horizon, eo);

    for (std::size_t k = 0; k < trace.snapshots.size(); ++k)
        w.emit(snap_name(k), flow_state_csv(trace.snapshots[k]));
    w.emit("monitors.csv", flow_monitors_csv(trace.monitors));
    w.emit("event.json", singularity_event_json(trace.event));
    if (gauge == FlowGauge::Physical) {
        ConeSpec cone;
        cone.n = p.n;
        double mp = pnum(c.params, "m_plus");
        if (mp <= 0) mp = 1.0 / asymptotic_slope(p).value;
        cone.m_plus = cone.m_minus = mp;
        w.emit("tube.json", tube_json(trace, cone));
    }
}

}  // namespace

// ---- config / manifest serialization ----

RunConfig parse_run_config(const std::string& json_text) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const std::exception& e) {
        throw DomainError("bad-config", std::string("config is not valid JSON: ") +
                                            e.what());
    }
    RunConfig c;
    c.out.clear();
    for (const auto& [k, v] : j.items()) {
        if (k == "version") {
            c.version = v.get<std::string>();
        } else if (k == "subcommand") {
            c.subcommand = v.get<std::string>();
        } else if (k == "out") {
            c.out = v.get<std::string>();
        } else if (k == "tol") {
            c.tol = v.get<double>();
        } else if (k == "seedless") {
            c.seedless = v.get<bool>();
        } else if (k == "params") {
            for (const auto& [pk, pv] : v.items())
                c.params[pk] = canon_value(pv, pk);
        } else {
            throw DomainError("unknown-field", "unknown config field: " + k);
        }
    }
    if (c.version != "1")
        throw DomainError("bad-config", "unsupported config version: " + c.version);
    if (c.subcommand.empty())
        throw DomainError("bad-config", "config names no subcommand");
    if (c.out.empty()) c.out = ".";
    validate_params(c.subcommand, c.params);
    return c;
}

std::string serialize_run_config(const RunConfig& c) {
    std::ostringstream ss;
    ss << "{\"version\":\"" << jesc(c.version) << "\",\"subcommand\":\""
       << jesc(c.subcommand) << "\",\"out\":\"" << jesc(c.out)
       << "\",\"tol\":" << io::fmt(c.tol)
       << ",\"seedless\":" << (c.seedless ? "true" : "false") << ",\"params\":{";
    bool first = true;
    for (const auto& [k, v] : c.params) {
        if (!first) ss << ',';
        first = false;
        ss << '"' << jesc(k) << "\":\"" << jesc(v) << '"';
    }
    ss << "}}\n";
    return ss.str();
}

std::string serialize_manifest(const RunManifest& m) {
    std::ostringstream ss;
    std::string cfg = serialize_run_config(m.config);
    if (!cfg.empty() && cfg.back() == '\n') cfg.pop_back();
    ss << "{\"version\":\"" << jesc(m.version) << "\",\"config_hash\":\""
       << m.config_hash << "\",\"wall_time_ms\":" << m.wall_time_ms
       << ",\"config\":" << cfg << ",\"files\":[";
    for (std::size_t i = 0; i < m.files.size(); ++i) {
        if (i) ss << ',';
        ss << "{\"path\":\"" << jesc(m.files[i].path) << "\",\"fnv1a\":\""
           << m.files[i].fnv1a << "\"}";
    }
    ss << "]}\n";
    return ss.str();
}

RunManifest parse_manifest(const std::string& json_text) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const std::exception& e) {
        throw DomainError("bad-manifest",
                          std::string("manifest is not valid JSON: ") + e.what());
    }
    RunManifest m;
    for (const auto& [k, v] : j.items()) {
        if (k == "version") {
            m.version = v.get<std::string>();
        } else if (k == "config_hash") {
            m.config_hash = v.get<std::string>();
        } else if (k == "wall_time_ms") {
            m.wall_time_ms = v.get<long long>();
        } else if (k == "config") {
            m.config = parse_run_config(v.dump());
        } else if (k == "files") {
            for (const auto& f : v)
                m.files.push_back({f.at("path").get<std::string>(),
                                   f.at("fnv1a").get<std::string>()});
        } else {
            throw DomainError("unknown-field", "unknown manifest field: " + k);
        }
    }
    return m;
}

// ---- dispatch ----

namespace {

void run_report(const RunConfig& c, RunWriter& w, int& exit_code) {
    std::vector<std::string> dirs;
    std::stringstream ss(c.params.at("dirs"));
    std::string item;
    while (std::getline(ss, item, ';'))
        if (!item.empty()) dirs.push_back(item);
    if (dirs.empty())
        throw DomainError("bad-value", "report needs at least one run directory");
    const auto rep = evaluate_acceptance(dirs);
    w.emit("report.json", acceptance_report_json(rep));
    w.emit("report.txt", acceptance_report_text(rep));
    exit_code = rep.all_pass ? 0 : 1;
}

int dispatch_impl(const std::vector<std::string>& args) {
    CLI::App app{"numerical laboratory for rotationally symmetric self-expanders"};
    app.require_subcommand(0, 1);

    std::string config_path, out_flag;
    double tol_flag = 0.0;
    bool seedless = false;
    app.add_option("--config", config_path,
                   "JSON run configuration; explicit flags override its values");
    app.add_option("--out", out_flag,
                   "output directory (default $EXPANDERLAB_OUT, then .)");
    app.add_option("--tol", tol_flag, "integrator/quadrature tolerance override");
    app.add_flag("--seedless", seedless,
                 "assert that no randomness is consulted (always holds; every "
                 "computation here is deterministic)");

    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    std::map<std::string, std::map<std::string, std::string>> staged;
    std::vector<std::string> report_dirs;
    const std::map<std::string, std::string> descs = {
        {"shoot", "integrate one expander profile"},
        {"mcurve", "trace the asymptotic-slope curve m(a)"},
        {"find", "find profiles matching a target asymptotic slope"},
        {"entropy", "Gaussian entropy of cones and minimal-cone densities"},
        {"eigen", "lowest eigenpair of the stability operator"},
        {"flow", "rescaled or physical graphical mean curvature flow"},
        {"report", "verify stored runs and evaluate the acceptance table"},
    };
    for (const auto& [sub, keys] : allowed_params()) {
        auto* sc = app.add_subcommand(sub, descs.at(sub));
        sc->fallthrough();
        if (sub == "report") {
            sc->add_option("dirs", report_dirs, "run directories to audit");
            continue;
        }
        for (const auto& key : keys) {
            if (sub == "entropy" && key == "mode") {
                opts[sub][key] =
                    sc->add_option("mode", staged[sub][key], "cone | scan | simons");
                continue;
            }
            // "--h" would collide with the help short name
            std::string flag = key == "h" ? "--h-step" : "--" + key;
            std::replace(flag.begin(), flag.end(), '_', '-');
            opts[sub][key] = sc->add_option(flag, staged[sub][key], key);
        }
    }

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    RunConfig base;
    bool have_config = false;
    if (!config_path.empty()) {
        base = parse_run_config(io::read_file(config_path));
        have_config = true;
    }
    std::string sub;
    for (const auto* sc : app.get_subcommands()) sub = sc->get_name();
    if (sub.empty()) {
        if (!have_config) {
            std::cerr << "usage error: no subcommand given (see --help)\n";
            return 2;
        }
        sub = base.subcommand;
    } else if (have_config && sub != base.subcommand) {
        std::cerr << "usage error: subcommand " << sub
                  << " conflicts with config subcommand " << base.subcommand << '\n';
        return 2;
    }

    RunConfig c;
    c.subcommand = sub;
    c.params = default_params(sub);
    if (have_config)
        for (const auto& [k, v] : base.params) c.params[k] = v;
    if (opts.count(sub))
        for (const auto& [k, opt] : opts.at(sub))
            if (opt->count() > 0) c.params[k] = staged[sub][k];
    if (sub == "report" && !report_dirs.empty()) {
        std::string joined;
        for (const auto& d : report_dirs) {
            if (!joined.empty()) joined.push_back(';');
            joined += d;
        }
        c.params["dirs"] = joined;
    }
    validate_params(sub, c.params);
    c.tol = tol_flag > 0 ? tol_flag : (have_config ? base.tol : 0.0);
    c.seedless = seedless || (have_config && base.seedless);
    if (!out_flag.empty()) {
        c.out = out_flag;
    } else if (have_config && base.out != ".") {
        c.out = base.out;
    } else if (const char* env = std::getenv("EXPANDERLAB_OUT"); env && *env) {
        c.out = env;
    } else {
        c.out = ".";
    }

    RunWriter w;
    w.dir = c.out;
    int exit_code = 0;
    const auto start = std::chrono::steady_clock::now();
    if (sub == "shoot") run_shoot(c, w);
    else if (sub == "mcurve") run_mcurve(c, w);
    else if (sub == "find") run_find(c, w);
    else if (sub == "entropy") run_entropy(c, w);
    else if (sub == "eigen") run_eigen(c, w);
    else if (sub == "flow") run_flow(c, w);
    else if (sub == "report") run_report(c, w, exit_code);
    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    finalize_run(c, w, wall);
    return exit_code;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    try {
        return dispatch_impl(args);
    } catch (const DomainError& e) {
        std::cerr << "error [" << e.code << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mcf::cli
