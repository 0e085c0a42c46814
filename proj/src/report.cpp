#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mcf/cli.hpp"
#include "mcf/entropy.hpp"
#include "mcf/io.hpp"
#include "mcf/shooting.hpp"

namespace mcf::cli {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

struct Skip {
    std::string why;
};

struct LoadedRun {
    std::string dir;
    RunManifest manifest;
    std::map<std::string, std::string> text;  // path -> verified content

    const std::string& file(const std::string& path) const {
        const auto it = text.find(path);
        if (it == text.end()) throw Skip{dir + " lacks " + path};
        return it->second;
    }
    std::string param(const std::string& k) const {
        const auto it = manifest.config.params.find(k);
        return it == manifest.config.params.end() ? "" : it->second;
    }
    double num(const std::string& k) const { return std::stod(param(k)); }
};

std::vector<LoadedRun> load_runs(const std::vector<std::string>& run_dirs,
                                 std::vector<std::string>& errors) {
    namespace fs = std::filesystem;
    std::vector<LoadedRun> runs;
    for (const auto& dir : run_dirs) {
        LoadedRun run;
        run.dir = dir;
        try {
            run.manifest =
                parse_manifest(io::read_file((fs::path(dir) / "manifest.json").string()));
        } catch (const std::exception& e) {
            errors.push_back(dir + ": unreadable manifest (" + e.what() + ")");
            continue;
        }
        bool ok = true;
        for (const auto& entry : run.manifest.files) {
            std::string content;
            try {
                content = io::read_file((fs::path(dir) / entry.path).string());
            } catch (const std::exception&) {
                errors.push_back(dir + ": missing file " + entry.path);
                ok = false;
                continue;
            }
            if (io::fnv1a_hex(content) != entry.fnv1a) {
                errors.push_back(dir + ": checksum mismatch for " + entry.path);
                ok = false;
                continue;
            }
            run.text[entry.path] = std::move(content);
        }
        if (ok) runs.push_back(std::move(run));
    }
    return runs;
}

std::vector<const LoadedRun*> select(
    const std::vector<LoadedRun>& runs, const std::string& sub,
    const std::function<bool(const LoadedRun&)>& pred) {
    std::vector<const LoadedRun*> out;
    for (const auto& r : runs)
        if (r.manifest.config.subcommand == sub && pred(r)) out.push_back(&r);
    return out;
}

const LoadedRun& one(const std::vector<const LoadedRun*>& sel,
                     const std::string& what) {
    if (sel.empty()) throw Skip{"no stored run: " + what};
    return *sel.front();
}

ojson parse_json(const std::string& text, const std::string& what) {
    try {
        return ojson::parse(text);
    } catch (const std::exception& e) {
        throw Skip{what + " is not valid JSON: " + e.what()};
    }
}

void need(std::vector<std::string>& problems, bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
}

// ---- criteria ----

std::string check_slope_curve_roots(const std::vector<LoadedRun>& runs) {
    const auto& mc = one(
        select(runs, "mcurve",
               [](const LoadedRun& r) {
                   return r.param("family") == "triple" && r.num("n") == 2;
               }),
        "mcurve family=triple n=2");
    const auto curve = io::read_csv(mc.file("curve.csv"));
    std::vector<std::string> problems;
    need(problems, curve.rows.size() >= 64,
         "curve has " + std::to_string(curve.rows.size()) + " samples, need >= 64");
    double m_min = curve.rows.front()[1];
    for (const auto& row : curve.rows) m_min = std::min(m_min, row[1]);
    need(problems, curve.rows.front()[1] > m_min && curve.rows.back()[1] > m_min,
         "endpoint slopes do not exceed the interior minimum");

    const auto finds = select(runs, "find", [](const LoadedRun& r) {
        return r.param("family") == "triple" && r.num("n") == 2;
    });
    const LoadedRun* base = nullptr;
    const LoadedRun* tight = nullptr;
    for (const auto* f : finds) {
        if (f->manifest.config.tol == 0.0) base = f;
        else if (!tight || f->manifest.config.tol < tight->manifest.config.tol)
            tight = f;
    }
    if (!base || !tight) throw Skip{"need find runs at default and tightened tol"};

    std::vector<std::vector<double>> root_as;
    for (const auto* f : {base, tight}) {
        const auto j = parse_json(f->file("roots.json"), f->dir + "/roots.json");
        need(problems, std::abs(j.at("target").get<double>() - 1.25 * m_min) <= 1e-6,
             "target slope is not 1.25 * curve minimum");
        std::vector<double> as;
        for (const auto& rt : j.at("roots")) {
            as.push_back(rt.at("a").get<double>());
            need(problems, rt.at("residual").get<double>() <= 1e-6,
                 "root residual above 1e-6 in " + f->dir);
        }
        need(problems, as.size() >= 2,
             "fewer than 2 roots in " + f->dir);
        std::sort(as.begin(), as.end());
        root_as.push_back(as);
    }
    if (root_as[0].size() == root_as[1].size()) {
        double shift = 0.0;
        for (std::size_t i = 0; i < root_as[0].size(); ++i)
            shift = std::max(shift, std::abs(root_as[0][i] - root_as[1][i]));
        need(problems, shift <= 1e-4,
             "roots move by " + io::fmt(shift) + " under tolerance tightening");
    } else {
        problems.push_back("root count changes under tolerance tightening");
    }
    if (!problems.empty()) throw problems;
    return "m_min=" + io::fmt(m_min) + ", " + std::to_string(root_as[0].size()) +
           " roots stable to 1e-4";
}

std::vector<const LoadedRun*> triple_shoots(const std::vector<LoadedRun>& runs) {
    const auto sel = select(runs, "shoot", [](const LoadedRun& r) {
        return r.param("family") == "triple";
    });
    if (sel.empty()) throw Skip{"no stored shoot runs with family=triple"};
    return sel;
}

std::string check_profile_invariants(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    const auto sel = triple_shoots(runs);
    for (const auto* sr : sel) {
        const auto csv = io::read_csv(sr->file("profile.csv"));
        const int n = static_cast<int>(sr->num("n"));
        bool positive = true, increasing = true;
        int flips = 0;
        double prev_sign = 0.0;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const double r = csv.rows[i][0], u = csv.rows[i][1], du = csv.rows[i][2];
            positive = positive && u > 0;
            if (i >= 2) increasing = increasing && u > csv.rows[i - 1][1];
            const double ddu = expander_ode_rhs(u, du, r, n);
            const double sign = ddu > 1e-13 ? 1.0 : (ddu < -1e-13 ? -1.0 : 0.0);
            if (sign != 0.0) {
                if (prev_sign != 0.0 && sign != prev_sign) ++flips;
                prev_sign = sign;
            }
        }
        double alpha_lo = kPi, alpha_hi = -kPi;
        const double r_back = csv.rows.back()[0];
        for (const auto& row : csv.rows) {
            if (row[0] < 0.9 * r_back) continue;
            const double alpha = std::atan(row[1] / row[0]);
            alpha_lo = std::min(alpha_lo, alpha);
            alpha_hi = std::max(alpha_hi, alpha);
        }
        need(problems, positive, sr->dir + ": u not positive everywhere");
        need(problems, increasing, sr->dir + ": u not strictly increasing");
        need(problems, flips <= 1, sr->dir + ": u_rr changes sign more than once");
        need(problems, alpha_hi - alpha_lo < 1e-4,
             sr->dir + ": cone angle oscillation " + io::fmt(alpha_hi - alpha_lo));
    }
    if (!problems.empty()) throw problems;
    return std::to_string(sel.size()) + " triple profile(s) satisfy all invariants";
}

std::string check_junction_angles(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    const auto sel = triple_shoots(runs);
    double worst = 0.0;
    for (const auto* sr : sel) {
        const auto csv = io::read_csv(sr->file("profile.csv"));
        Profile stub;
        stub.family = ProfileFamily::TripleJunction;
        stub.grid = {csv.rows[0][0]};
        stub.u = {csv.rows[0][1]};
        stub.du = {csv.rows[0][2]};
        for (double angle : junction_geometry_check(stub))
            worst = std::max(worst, std::abs(angle - 2 * kPi / 3));
    }
    need(problems, worst <= 1e-12,
         "sheet angle deviates from 2pi/3 by " + io::fmt(worst));
    if (!problems.empty()) throw problems;
    return "max angle deviation " + io::fmt(worst);
}

const LoadedRun& cone_run(const std::vector<LoadedRun>& runs, int n, double m) {
    return one(select(runs, "entropy",
                      [n, m](const LoadedRun& r) {
                          return r.param("mode") == "cone" && r.num("n") == n &&
                                 r.num("m_plus") == m && r.num("m_minus") == m;
                      }),
               "entropy cone n=" + std::to_string(n) + " m=" + io::fmt(m));
}

double circle_entropy_quadrature() {
    // Gaussian area of the circle of radius sqrt(2) maximized over the scale
    const double rho = std::sqrt(2.0);
    double best = 0.0;
    for (int ti = 1; ti <= 4000; ++ti) {
        const double t = ti * 5e-4;
        const int K = 2048;
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            const double phi = 2 * kPi * (k + 0.5) / K;
            const double x = rho * std::cos(phi), y = rho * std::sin(phi);
            sum += std::exp(-(x * x + y * y) / (4 * t));
        }
        best = std::max(best, sum * (2 * kPi * rho / K) / std::sqrt(4 * kPi * t));
    }
    return best;
}

std::string check_entropy_closed_forms(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    double worst = 0.0;
    for (int n : {2, 3})
        for (double m : {0.25, 1.0, 4.0}) {
            const auto& run = cone_run(runs, n, m);
            const auto j = parse_json(run.file("entropy.json"), run.dir);
            const double expect = 2.0 * std::pow(1.0 + m * m, -(n - 1) / 2.0);
            const double err = std::abs(j.at("f_at_origin").get<double>() - expect);
            worst = std::max(worst, err);
            need(problems, err <= 1e-8,
                 run.dir + ": origin density off closed form by " + io::fmt(err));
        }
    need(problems, reference_entropy(ReferenceShrinker::Hyperplane) == 1.0,
         "hyperplane entropy is not exactly 1");
    const double sphere = reference_entropy(ReferenceShrinker::Sphere, 1);
    const double closed = std::sqrt(2 * kPi / std::exp(1.0));
    need(problems, std::abs(sphere - closed) <= 1e-10,
         "circle entropy off sqrt(2 pi / e) by " + io::fmt(std::abs(sphere - closed)));
    const double quad = circle_entropy_quadrature();
    need(problems, std::abs(quad - closed) <= 1e-6,
         "brute-force circle quadrature off by " + io::fmt(std::abs(quad - closed)));
    if (!problems.empty()) throw problems;
    return "max origin-density error " + io::fmt(worst) + ", quadrature error " +
           io::fmt(std::abs(quad - closed));
}

std::string check_low_entropy_cones(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    double worst_gap = 2.0;
    for (double m : {0.25, 0.5, 1.0}) {
        const auto& run = cone_run(runs, 2, m);
        const auto j = parse_json(run.file("entropy.json"), run.dir);
        const double lambda = j.at("lambda").get<double>();
        const double qerr = j.at("quad_error").get<double>();
        worst_gap = std::min(worst_gap, 2.0 - qerr - lambda);
        need(problems, lambda < 2.0 - qerr,
             run.dir + ": lambda " + io::fmt(lambda) + " not below 2 - quad_error");
    }
    const auto& steep = cone_run(runs, 2, 8.0);
    const auto j = parse_json(steep.file("entropy.json"), steep.dir);
    const double gap =
        std::abs(j.at("lambda").get<double>() - std::sqrt(2 * kPi / std::exp(1.0)));
    need(problems, gap < 0.05,
         "m=8 entropy off the cylinder limit by " + io::fmt(gap));
    if (!problems.empty()) throw problems;
    return "min margin below 2: " + io::fmt(worst_gap) + ", cylinder-limit gap " +
           io::fmt(gap);
}

std::string check_simons_density(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    double worst = 0.0, densest = 0.0;
    for (int n = 2; n <= 8; ++n)
        for (int p = 1; p <= n - 1; ++p) {
            const double closed = simons_density(n, p).theta;
            const double err = std::abs(closed - simons_density_numeric(n, p));
            worst = std::max(worst, err);
            densest = std::max(densest, closed);
            need(problems, err <= 1e-10,
                 "closed vs numeric density differ by " + io::fmt(err) + " at (" +
                     std::to_string(n) + "," + std::to_string(p) + ")");
        }
    need(problems, densest < 2.0, "a minimal-cone density reaches 2");

    const auto& run = one(select(runs, "entropy",
                                 [](const LoadedRun& r) {
                                     return r.param("mode") == "simons" &&
                                            r.num("n") == 2 && r.num("p") == 1;
                                 }),
                          "entropy simons n=2 p=1");
    const std::string& text = run.file("simons.json");
    const auto j = parse_json(text, run.dir);
    need(problems, std::abs(j.at("theta").get<double>() - kPi / 2) <= 1e-12,
         "(2,1) density is not pi/2 to 12 digits");
    need(problems,
         text.find("paper_discrepancy") != std::string::npos &&
             text.find("3/2") != std::string::npos,
         "(2,1) output lacks the prose-value discrepancy note");
    if (!problems.empty()) throw problems;
    return "max closed-vs-numeric error " + io::fmt(worst) + ", all densities < " +
           io::fmt(densest) + " < 2";
}

const LoadedRun& wide_cone_eigen(const std::vector<LoadedRun>& runs) {
    return one(select(runs, "eigen",
                      [](const LoadedRun& r) {
                          return r.param("family") == "connected" && r.num("a") < 1.0;
                      }),
               "eigen family=connected on the wide cone");
}

std::string check_unstable_eigenpair(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    const auto& run = wide_cone_eigen(runs);
    const auto j = parse_json(run.file("eigen.json"), run.dir);
    const double mu1 = j.at("mu1").get<double>();
    need(problems, mu1 < 0.0 && mu1 < 0.5, "mu1 = " + io::fmt(mu1) + " not negative");
    need(problems, j.at("rayleigh_residual").get<double>() < 1e-10,
         "Rayleigh residual " + io::fmt(j.at("rayleigh_residual").get<double>()));
    need(problems, j.at("mu1_extrap_delta").get<double>() < 1e-4,
         "grid-halving extrapolation delta " +
             io::fmt(j.at("mu1_extrap_delta").get<double>()));
    need(problems, j.value("envelope_pass", false), "decay envelope check fails");
    const auto cs = j.at("envelope_C_trunc");
    double c_lo = cs[0].get<double>(), c_hi = c_lo;
    for (const auto& c : cs) {
        c_lo = std::min(c_lo, c.get<double>());
        c_hi = std::max(c_hi, c.get<double>());
    }
    need(problems, c_hi / c_lo - 1.0 < 0.1,
         "envelope constant varies by " + io::fmt(c_hi / c_lo - 1.0) +
             " across truncations");
    const auto csv = io::read_csv(run.file("eigenfunction.csv"));
    bool positive = true;
    for (std::size_t i = 0; i + 1 < csv.rows.size(); ++i)
        positive = positive && csv.rows[i][3] > 0;
    need(problems, positive, "eigenfunction not positive at interior nodes");
    if (!problems.empty()) throw problems;
    return "mu1 = " + io::fmt(mu1) + ", envelope C in [" + io::fmt(c_lo) + ", " +
           io::fmt(c_hi) + "]";
}

std::string check_linearization_order(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    const auto& run = wide_cone_eigen(runs);
    const auto j = parse_json(run.file("linearization.json"), run.dir);
    const auto errs = j.at("sup_errors");
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i)
        decreasing = decreasing && errs[i + 1].get<double>() < errs[i].get<double>();
    need(problems, decreasing, "linearization error not decreasing in epsilon");
    const double order = j.at("order").get<double>();
    need(problems, order >= 0.9, "observed order " + io::fmt(order) + " below 0.9");
    if (!problems.empty()) throw problems;
    return "observed order " + io::fmt(order);
}

double run_drift(const LoadedRun& run) {
    std::size_t last = 0;
    for (const auto& entry : run.manifest.files)
        if (entry.path.rfind("snap_", 0) == 0)
            last = std::max(last, static_cast<std::size_t>(
                                      std::stoul(entry.path.substr(5, 4))));
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%04zu.csv", last);
    const auto first = io::read_csv(run.file("snap_0000.csv"));
    const auto final_ = io::read_csv(run.file(buf));
    if (first.rows.size() != final_.rows.size())
        throw Skip{run.dir + ": snapshot grids differ"};
    double drift = 0.0;
    for (std::size_t i = 0; i < first.rows.size(); ++i)
        drift = std::max(drift, std::abs(final_.rows[i][1] - first.rows[i][1]));
    return drift;
}

std::string check_flow_stationarity(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    std::map<int, double> drift;
    for (int nodes : {301, 601, 1201}) {
        const auto& run = one(
            select(runs, "flow",
                   [nodes](const LoadedRun& r) {
                       return r.param("gauge") == "rescaled" &&
                              r.num("epsilon") == 0.0 && r.num("nodes") == nodes &&
                              r.param("line_rates") != "true";
                   }),
            "stationarity flow at " + std::to_string(nodes) + " nodes");
        drift[nodes] = run_drift(run);
    }
    need(problems, drift[601] < 1e-3,
         "default-resolution drift " + io::fmt(drift[601]));
    const double ratio = drift[301] / drift[1201];
    need(problems, ratio > 8.0 && ratio < 32.0,
         "coarse/fine drift ratio " + io::fmt(ratio) + " not second order");
    if (!problems.empty()) throw problems;
    return "drift " + io::fmt(drift[601]) + " at 601 nodes, refinement ratio " +
           io::fmt(ratio);
}

std::string check_flow_line_rates(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    const auto& run = one(select(runs, "flow",
                                 [](const LoadedRun& r) {
                                     return r.param("line_rates") == "true";
                                 }),
                          "flow line-rate experiment");
    const auto j = parse_json(run.file("rates.json"), run.dir);
    const double mu1 = j.at("mu1").get<double>();
    for (const char* key : {"rate_outward", "rate_inward"}) {
        const double rate = j.at(key).get<double>();
        need(problems, std::abs(rate - (-mu1)) <= 0.2 * std::abs(mu1),
             std::string(key) + " = " + io::fmt(rate) + " vs -mu1 = " +
                 io::fmt(-mu1));
    }
    if (!problems.empty()) throw problems;
    return "escape rates " + io::fmt(j.at("rate_outward").get<double>()) + " / " +
           io::fmt(j.at("rate_inward").get<double>()) + " vs -mu1 = " + io::fmt(-mu1);
}

std::string check_neck_pinch(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    const auto& run = one(select(runs, "flow",
                                 [](const LoadedRun& r) {
                                     return r.param("gauge") == "physical" &&
                                            r.num("epsilon") < 0.0;
                                 }),
                          "inward-perturbed physical flow");
    const auto j = parse_json(run.file("event.json"), run.dir);
    need(problems, j.at("type").get<std::string>() == "neck_pinch",
         "event type is " + j.at("type").get<std::string>());
    const double drho = run.num("domain") / (run.num("nodes") - 1);
    const double loc = std::abs(j.at("location").get<double>());
    need(problems, loc <= 2 * drho, "pinch at |rho| = " + io::fmt(loc));
    const auto& fit = j.at("fit");
    const double expo = fit.at("exponent").get<double>();
    const double pref = fit.at("prefactor").get<double>();
    const double oracle = std::sqrt(2.0 * (run.num("n") - 1));
    need(problems, std::abs(expo - 0.5) <= 0.05,
         "extinction exponent " + io::fmt(expo));
    need(problems, std::abs(pref - oracle) <= 0.1 * oracle,
         "extinction prefactor " + io::fmt(pref) + " vs " + io::fmt(oracle));
    need(problems, fit.at("r2").get<double>() > 0.99,
         "extinction fit r2 " + io::fmt(fit.at("r2").get<double>()));
    if (!problems.empty()) throw problems;
    return "pinch at origin, exponent " + io::fmt(expo) + ", prefactor " +
           io::fmt(pref) + " vs oracle " + io::fmt(oracle);
}

std::string check_cone_tube(const std::vector<LoadedRun>& runs) {
    std::vector<std::string> problems;
    const auto& run = one(select(runs, "flow",
                                 [](const LoadedRun& r) {
                                     return r.param("gauge") == "physical" &&
                                            r.num("epsilon") == 0.0;
                                 }),
                          "unperturbed physical flow");
    const auto j = parse_json(run.file("tube.json"), run.dir);
    need(problems, j.at("pass").get<bool>(), "a snapshot violates the tube bound");
    need(problems, j.at("min_margin").get<double>() > 0.0,
         "tube margin " + io::fmt(j.at("min_margin").get<double>()));
    need(problems, j.at("n_prime").get<double>() <= 10.0,
         "tube constant " + io::fmt(j.at("n_prime").get<double>()));
    if (!problems.empty()) throw problems;
    return io::fmt(j.at("snapshots").get<double>()) +
           " snapshots pass with N' = " + io::fmt(j.at("n_prime").get<double>()) +
           ", margin " + io::fmt(j.at("min_margin").get<double>());
}

std::string jesc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

AcceptanceReport evaluate_acceptance(const std::vector<std::string>& run_dirs) {
    AcceptanceReport rep;
    auto dirs = run_dirs;
    std::sort(dirs.begin(), dirs.end());
    const auto runs = load_runs(dirs, rep.integrity_errors);
    rep.runs = runs.size();

    using Check = std::string (*)(const std::vector<LoadedRun>&);
    const std::vector<std::pair<std::string, Check>> table = {
        {"slope-curve-roots", check_slope_curve_roots},
        {"profile-invariants", check_profile_invariants},
        {"junction-angles", check_junction_angles},
        {"entropy-closed-forms", check_entropy_closed_forms},
        {"low-entropy-cones", check_low_entropy_cones},
        {"simons-density", check_simons_density},
        {"unstable-eigenpair", check_unstable_eigenpair},
        {"linearization-order", check_linearization_order},
        {"flow-stationarity", check_flow_stationarity},
        {"flow-line-rates", check_flow_line_rates},
        {"neck-pinch", check_neck_pinch},
        {"cone-tube", check_cone_tube},
    };
    for (std::size_t i = 0; i < table.size(); ++i) {
        CriterionResult cr;
        cr.id = static_cast<int>(i) + 1;
        cr.name = table[i].first;
        try {
            cr.detail = table[i].second(runs);
            cr.status = "pass";
        } catch (const Skip& s) {
            cr.status = "skipped";
            cr.detail = s.why;
        } catch (const std::vector<std::string>& problems) {
            cr.status = "fail";
            for (const auto& p : problems) {
                if (!cr.detail.empty()) cr.detail += "; ";
                cr.detail += p;
            }
        } catch (const std::exception& e) {
            cr.status = "fail";
            cr.detail = e.what();
        }
        rep.criteria.push_back(std::move(cr));
    }

    CriterionResult last;
    last.id = 13;
    last.name = "determinism-integration";
    bool ok = rep.integrity_errors.empty();
    for (const auto& cr : rep.criteria) ok = ok && cr.status == "pass";
    last.status = ok ? "pass" : "fail";
    last.detail = ok ? "checksums verified on " + std::to_string(rep.runs) +
                           " runs, criteria 1-12 pass"
                     : std::to_string(rep.integrity_errors.size()) +
                           " integrity error(s), or a criterion not passing";
    rep.criteria.push_back(std::move(last));
    rep.all_pass = ok;
    return rep;
}

std::string acceptance_report_json(const AcceptanceReport& r) {
    std::ostringstream ss;
    ss << "{\"runs\":" << r.runs << ",\"all_pass\":" << (r.all_pass ? "true" : "false")
       << ",\"integrity_errors\":[";
    for (std::size_t i = 0; i < r.integrity_errors.size(); ++i)
        ss << (i ? "," : "") << '"' << jesc(r.integrity_errors[i]) << '"';
    ss << "],\"criteria\":[";
    for (std::size_t i = 0; i < r.criteria.size(); ++i) {
        const auto& c = r.criteria[i];
        ss << (i ? "," : "") << "{\"id\":" << c.id << ",\"name\":\"" << jesc(c.name)
           << "\",\"status\":\"" << c.status << "\",\"detail\":\"" << jesc(c.detail)
           << "\"}";
    }
    ss << "]}\n";
    return ss.str();
}

std::string acceptance_report_text(const AcceptanceReport& r) {
    std::ostringstream ss;
    ss << "acceptance over " << r.runs << " stored run(s): "
       << (r.all_pass ? "ALL PASS" : "NOT PASSING") << '\n';
    for (const auto& e : r.integrity_errors) ss << "integrity: " << e << '\n';
    for (const auto& c : r.criteria) {
        ss << "criterion " << (c.id < 10 ? " " : "") << c.id << " " << c.name << ": "
           << c.status;
        if (!c.detail.empty()) ss << " -- " << c.detail;
        ss << '\n';
    }
    return ss.str();
}

}  // namespace mcf::cli
