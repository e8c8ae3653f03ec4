// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is non-zero
// when any criterion fails.

#include "cli.hpp"
#include "oracles.hpp"

#include "emgauth/error.hpp"
#include "emgauth/parallel.hpp"
#include "emgauth/selection.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

using namespace emgauth;
namespace fs = std::filesystem;

namespace {

class Criterion {
public:
    explicit Criterion(std::string name) : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures_;
            if (failures_ <= 5) detail_ << (!detail_.str().empty() ? "; " : "") << what;
        }
        ++checks_;
    }

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    void note(const std::string& text) { notes_ << (!notes_.str().empty() ? ", " : "") << text; }

    bool report() const {
        const bool ok = failures_ == 0;
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name_ << "  (" << checks_ << " checks, "
                  << std::fixed << std::setprecision(2) << seconds() << " s";
        if (!notes_.str().empty()) std::cout << ", " << notes_.str();
        std::cout << ")";
        if (!ok) std::cout << "  " << failures_ << " failed: " << detail_.str();
        std::cout << std::endl;
        return ok;
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point start_;
    int checks_ = 0;
    int failures_ = 0;
    std::ostringstream detail_;
    std::ostringstream notes_;
};

bool rel_close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

bool feature_oracles() {
    Criterion c("1 feature oracle suite (1000 random windows)");
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> len(64, 512);
    const auto bands = equal_bands(6);
    for (int w = 0; w < 1000; ++w) {
        std::vector<double> x(static_cast<std::size_t>(len(rng)));
        for (auto& v : x) v = u(rng) * (1 + w % 7);
        const std::string at = "window " + std::to_string(w);
        c.expect(rel_close(mav(x), oracle::mav(x), 1e-12), at + " mav");
        c.expect(rel_close(rms(x), oracle::rms(x), 1e-12), at + " rms");
        c.expect(rel_close(wl(x), oracle::wl(x), 1e-12), at + " wl");
        const double th = (w % 3) * 0.01;
        c.expect(ssc(x, th) == oracle::ssc(x, th), at + " ssc");
        c.expect(zc(x, th) == oracle::zc(x, th), at + " zc");
        const auto f = fdt(x, bands, 1e-12, 2048);
        const auto o = oracle::fdt(x, bands, 1e-12, 2048);
        for (std::size_t b = 0; b < bands.size(); ++b) c.expect(rel_close(f[b], o[b], 1e-9), at + " fdt");
    }
    c.expect(c.seconds() < 10.0, "runtime over 10 s");
    return c.report();
}

bool ar_recovery() {
    Criterion c("2 AR recovery (Burg vs known process and Yule-Walker, 20 seeds)");
    double worst_a1 = 0, worst_rest = 0, worst_yw = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = oracle::ar_process({0.5}, 100000, seed);
        const auto est = ar_coeffs(x, 6);
        const auto yw = oracle::yule_walker(x, 6);
        c.expect(!est.degenerate, "degenerate estimate");
        worst_a1 = std::max(worst_a1, std::fabs(est.coeffs[0] - 0.5));
        for (int p = 1; p < 6; ++p) worst_rest = std::max(worst_rest, std::fabs(est.coeffs[p]));
        for (int p = 0; p < 6; ++p) worst_yw = std::max(worst_yw, std::fabs(est.coeffs[p] - yw[p]));
        c.expect(is_stable(est.coeffs), "unstable estimate");
    }
    c.expect(worst_a1 <= 0.05, "a1 off by " + fmt(worst_a1));
    c.expect(worst_rest <= 0.05, "|a2..a6| up to " + fmt(worst_rest));
    c.expect(worst_yw <= 0.02, "Yule-Walker gap " + fmt(worst_yw));
    c.note("max |a1-0.5| " + fmt(worst_a1) + ", max |a2..a6| " + fmt(worst_rest) + ", max YW gap " + fmt(worst_yw));
    c.expect(c.seconds() < 30.0, "runtime over 30 s");
    return c.report();
}

bool affine_invariance() {
    Criterion c("3 Mahalanobis affine invariance (50 pairs) and analytic cases");
    std::mt19937_64 rng(303);
    std::normal_distribution<double> n01;
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index d = 1 + t % 8;
        const Eigen::Index n = 20 + 10 * d;
        Eigen::MatrixXd rows(n, d), a(d, d);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index k = 0; k < d; ++k) rows(r, k) = n01(rng) * (k + 1);
        Eigen::VectorXd b(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            b(i) = 5 * n01(rng);
            for (Eigen::Index j = 0; j < d; ++j) a(i, j) = n01(rng);
        }
        if (std::fabs(a.determinant()) < 0.1) a += Eigen::MatrixXd::Identity(d, d);
        const Eigen::MatrixXd moved = (rows * a.transpose()).rowwise() + b.transpose();
        const auto m1 = fit_class_model(rows, 0.0, "g", "u");
        const auto m2 = fit_class_model(moved, 0.0, "g", "u");
        for (int p = 0; p < 10; ++p) {
            Eigen::VectorXd probe(d);
            for (Eigen::Index i = 0; i < d; ++i) probe(i) = 2 * n01(rng);
            const double s1 = mahalanobis_score(m1, probe);
            const double s2 = mahalanobis_score(m2, a * probe + b);
            worst = std::max(worst, std::fabs(s1 - s2) / std::max(s1, 1e-300));
        }
    }
    c.expect(worst <= 1e-6, "relative gap " + fmt(worst));
    c.note("max relative gap " + fmt(worst));

    // Rows (+-1, +-1) scaled so the covariance is exactly I or diag(4, 1).
    Eigen::MatrixXd rows(4, 2);
    rows << 1, 1, -1, -1, 1, -1, -1, 1;
    rows *= std::sqrt(0.75);
    const auto iso = fit_class_model(rows, 0.0, "g", "u");
    c.expect(std::fabs(mahalanobis_score(iso, Eigen::Vector2d(3, 4)) - 5.0) <= 1e-12, "isotropic case");
    c.expect(mahalanobis_score(iso, iso.centroid) == 0.0, "probe at centroid");
    rows.col(0) *= 2;
    const auto diag = fit_class_model(rows, 0.0, "g", "u");
    c.expect(std::fabs(mahalanobis_score(diag, Eigen::Vector2d(2, 3)) - std::sqrt(10.0)) <= 1e-12 * std::sqrt(10.0),
             "diagonal case");
    Eigen::MatrixXd one(2, 1);
    one << 1, 3;
    const auto m = fit_class_model(one, 0.0, "g", "u");
    c.expect(m.centroid(0) == 2.0 && m.covariance(0, 0) == 2.0, "1-D hand case");
    return c.report();
}

bool eer_auc_oracle() {
    Criterion c("4 EER/AUC vs brute-force oracle (200 score-set pairs)");
    std::mt19937_64 rng(404);
    double worst_auc = 0;
    for (int t = 0; t < 200; ++t) {
        std::uniform_int_distribution<int> size(1, 120);
        std::normal_distribution<double> n01;
        const double shift = 0.02 * (t % 100);
        std::vector<double> g(static_cast<std::size_t>(size(rng))), i(static_cast<std::size_t>(size(rng)));
        for (auto& v : g) v = std::fabs(n01(rng));
        for (auto& v : i) v = std::fabs(n01(rng) + shift);
        // Distinct scores sit at least one grid step apart, far above the sweep resolution.
        const double grid = t % 4 == 0 ? 8.0 : 1000.0;
        for (auto& v : g) v = std::round(v * grid) / grid;
        for (auto& v : i) v = std::round(v * grid) / grid;
        const auto curve = det_curve(g, i);
        const auto o = oracle::det(g, i);
        bool same = curve.points.size() == o.size();
        for (std::size_t k = 0; same && k < o.size(); ++k) {
            same = curve.points[k].far == o[k].far && curve.points[k].frr == o[k].frr;
        }
        c.expect(same, "DET points differ at pair " + std::to_string(t));
        c.expect(rel_close(eer(curve), oracle::eer(o), 1e-12) || eer(curve) == oracle::eer(o),
                 "EER differs at pair " + std::to_string(t));
        const double gap = std::fabs(auc(curve) - oracle::auc_sweep(g, i, 100000));
        worst_auc = std::max(worst_auc, gap);
    }
    c.expect(worst_auc <= 1e-3, "AUC gap " + fmt(worst_auc));
    c.note("max AUC gap " + fmt(worst_auc));
    for (int t = 0; t < 20; ++t) {
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<double> g(10 + t), i(15 + t);
        for (auto& v : g) v = u(rng);
        for (auto& v : i) v = 1.5 + u(rng);
        const auto perfect = det_curve(g, i);
        c.expect(eer(perfect) == 0.0 && auc(perfect) == 0.0, "perfect separation not 0");
        const auto ident = det_curve(g, g);
        c.expect(eer(ident) == 0.5, "identical sets EER " + fmt(eer(ident)));
    }
    return c.report();
}

bool scenario_pools() {
    Criterion c("5 scenario pool sizes (3 users x 4 gestures x 10 windows)");
    const std::size_t users = 3, gestures = 4;
    const Eigen::Index windows = 10;
    std::mt19937_64 rng(505);
    std::normal_distribution<double> n01;
    FoldData fold;
    for (std::size_t u = 0; u < users; ++u) fold.users.push_back("U" + std::to_string(u));
    for (std::size_t g = 0; g < gestures; ++g) fold.gestures.push_back("G" + std::to_string(g));
    fold.models.resize(gestures);
    fold.probes.assign(users, std::vector<Eigen::MatrixXd>(gestures));
    for (std::size_t g = 0; g < gestures; ++g)
        for (std::size_t u = 0; u < users; ++u) {
            Eigen::MatrixXd rows(20, 3);
            for (Eigen::Index r = 0; r < 20; ++r)
                for (int k = 0; k < 3; ++k) rows(r, k) = n01(rng) + static_cast<double>(u + 2 * g);
            fold.models[g].push_back(fit_class_model(rows, 1e-3, fold.gestures[g], fold.users[u]));
            fold.probes[u][g] = Eigen::MatrixXd(windows, 3);
            for (Eigen::Index r = 0; r < windows; ++r)
                for (int k = 0; k < 3; ++k) fold.probes[u][g](r, k) = n01(rng) + static_cast<double>(u + 2 * g);
        }
    const std::size_t closed_form[3] = {(users - 1) * (gestures - 1) * windows, (users - 1) * windows,
                                        (gestures - 1) * windows};
    for (std::size_t g = 0; g < gestures; ++g)
        for (std::size_t u = 0; u < users; ++u)
            for (Scenario s : kAllScenarios) {
                const auto set = build_verification_scores(fold, s, g, u);
                std::size_t enumerated = 0;
                for (std::size_t v = 0; v < users; ++v)
                    for (std::size_t h = 0; h < gestures; ++h) {
                        const bool take = (s == Scenario::Normal && v != u && h != g) ||
                                          (s == Scenario::Leaked && v != u && h == g) ||
                                          (s == Scenario::Self && v == u && h != g);
                        enumerated += take ? static_cast<std::size_t>(fold.probes[v][h].rows()) : 0;
                    }
                c.expect(set.genuine.size() == static_cast<std::size_t>(windows), "genuine count");
                c.expect(set.impostor.size() == enumerated, to_string(s) + " vs enumeration");
                c.expect(set.impostor.size() == closed_form[static_cast<int>(s)], to_string(s) + " vs closed form");
            }
    c.note("normal " + std::to_string(closed_form[0]) + ", leaked " + std::to_string(closed_form[1]) + ", self " +
           std::to_string(closed_form[2]) + " impostors per claim");
    return c.report();
}

std::vector<EvalReport> g_reports;

bool separability() {
    Criterion c("6 end-to-end separability (6 users, 4 gestures, 7 trials, TD, 4 channels)");
    for (double separation : {10.0, 0.0}) {
        SynthSpec spec;
        spec.separation = separation;
        const auto t0 = std::chrono::steady_clock::now();
        const Dataset ds = synth_dataset(spec);
        EvalConfig config;
        config.channels = {0, 1, 2, 3};
        const EvalReport r = evaluate(ds, config);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double leaked = r.verification[static_cast<std::size_t>(Scenario::Leaked)]->eer.med;
        const double r1e = r.identification.front().second.med;
        if (separation > 0) {
            c.expect(leaked < 0.01, "separation 10 Leaked EER " + fmt(leaked));
            c.expect(r1e < 0.01, "separation 10 R1E " + fmt(r1e));
        } else {
            c.expect(leaked >= 0.45 && leaked <= 0.55, "separation 0 Leaked EER " + fmt(leaked));
            c.expect(std::fabs(r1e - 5.0 / 6.0) <= 0.1, "separation 0 R1E " + fmt(r1e));
        }
        c.expect(secs < 120.0, "LOO run over 2 min");
        c.note("sep " + fmt(separation) + ": Leaked EER " + fmt(leaked) + ", R1E " + fmt(r1e) + ", " + fmt(secs) + " s");
        g_reports.push_back(r);
    }
    return c.report();
}

bool sfs_oracle() {
    Criterion c("7 SFS vs exhaustive greedy oracle (4-channel toys)");
    for (std::uint64_t seed : {701u, 702u, 703u}) {
        const Dataset ds = fixture::toy_dataset(3, 3, 3, 4, 500, seed);
        EvalConfig config;
        config.window = WindowSpec{100, 50};
        const FeatureTable table = build_feature_table(ds, config.features, config.window);
        for (const std::string name : {"eer:normal", "eer:leaked", "eer:self", "r1e", "r2e"}) {
            const auto colon = name.find(':');
            const SfsMetric metric = colon == std::string::npos
                                         ? parse_metric(name)
                                         : parse_metric(name.substr(0, colon), parse_scenario(name.substr(colon + 1)));
            const SfsTrace trace = sfs(table, config, metric);
            std::vector<int> chosen;
            for (std::size_t it = 0; it < 4; ++it) {
                std::vector<double> errors;
                int best = -1;
                for (int ch = 0; ch < 4; ++ch) {
                    if (std::find(chosen.begin(), chosen.end(), ch) != chosen.end()) continue;
                    EvalConfig trial = config;
                    trial.channels = chosen;
                    trial.channels.push_back(ch);
                    std::sort(trial.channels.begin(), trial.channels.end());
                    const EvalReport r = evaluate(table, trial);
                    std::vector<double> per;
                    for (const auto& p : r.participants) {
                        per.push_back(metric.kind == SfsMetric::Kind::EER
                                          ? p.verification[static_cast<std::size_t>(metric.scenario)]->eer
                                          : rank_k_error(*p.identification, metric.rank));
                    }
                    const double e = quantile(per, 0.5);
                    if (best < 0 || e < *std::min_element(errors.begin(), errors.end())) best = ch;
                    errors.push_back(e);
                }
                chosen.push_back(best);
                const auto& got = trace.iterations.at(it);
                c.expect(got.selected_channel == best, name + " iteration " + std::to_string(it + 1) + " selection");
                bool same = got.candidates.size() == errors.size();
                for (std::size_t k = 0; same && k < errors.size(); ++k) same = got.candidates[k].error == errors[k];
                c.expect(same, name + " candidate errors");
                const auto [lo, hi] = std::minmax_element(errors.begin(), errors.end());
                c.expect(got.range == *hi - *lo, name + " range");
            }
        }
    }
    return c.report();
}

bool monotonicity() {
    Criterion c("8 DET and CMC monotonicity on every emitted curve");
    std::vector<DetCurve> curves;
    std::vector<CmcCurve> cmcs;
    for (const auto& r : g_reports) {
        for (const auto& d : r.pooled_det) {
            if (d) curves.push_back(*d);
        }
        if (r.pooled_cmc) cmcs.push_back(*r.pooled_cmc);
        for (const auto& p : r.participants) {
            if (p.identification) cmcs.push_back(cmc(*p.identification));
        }
    }
    std::mt19937_64 rng(808);
    std::exponential_distribution<double> ex;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> g(30), i(50);
        for (auto& v : g) v = ex(rng);
        for (auto& v : i) v = 1 + ex(rng);
        curves.push_back(det_curve(g, i));
    }
    for (const auto& d : curves) {
        bool ok = d.points.front().far == 0 && d.points.front().frr == 1 && d.points.back().far == 1 &&
                  d.points.back().frr == 0;
        for (std::size_t k = 1; k < d.points.size(); ++k) {
            ok = ok && d.points[k].far >= d.points[k - 1].far && d.points[k].frr <= d.points[k - 1].frr &&
                 d.points[k].threshold > d.points[k - 1].threshold;
        }
        c.expect(ok, "DET monotonicity");
        c.expect(d.eer >= 0 && d.eer <= 1 && d.auc >= 0 && d.auc <= 1, "EER/AUC range");
    }
    for (const auto& m : cmcs) {
        bool ok = m.rank_errors.back() == 0.0;
        for (std::size_t k = 1; k < m.rank_errors.size(); ++k) ok = ok && m.rank_errors[k] <= m.rank_errors[k - 1];
        c.expect(ok, "CMC monotonicity");
    }
    c.note(std::to_string(curves.size()) + " DET curves, " + std::to_string(cmcs.size()) + " CMC curves");
    return c.report();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = s.str();
    }
    return files;
}

bool determinism() {
    Criterion c("9 byte-identical eval and sfs reruns across thread counts");
    const fs::path root = fs::temp_directory_path() / "emgauth_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream sink;
    const auto run = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };
    c.expect(run({"synth", "--out", (root / "ds").string(), "--users", "4", "--gestures", "3", "--trials", "4",
                  "--channels", "4", "--duration", "2", "--seed", "9"}) == 0,
             "synth");
    const unsigned many = std::max(8u, std::thread::hardware_concurrency());
    for (const std::string cmd : {"eval", "sfs"}) {
        std::vector<std::string> base{cmd, "--dataset", (root / "ds").string(), "--features", "td+ar"};
        if (cmd == "sfs") {
            base.insert(base.end(), {"--metric", "r1e"});
        }
        std::map<std::string, std::string> first;
        for (unsigned threads : {1u, many, 2u, many}) {
            auto args = base;
            args.insert(args.end(), {"--out", (root / cmd).string(), "--threads", std::to_string(threads)});
            c.expect(run(args) == 0, cmd + " run");
            const auto snap = snapshot(root / cmd);
            if (first.empty()) {
                first = snap;
            } else {
                c.expect(snap == first, cmd + " output differs at " + std::to_string(threads) + " threads");
            }
        }
        c.note(cmd + ": " + std::to_string(first.size()) + " files");
    }
    set_thread_count(0);
    fs::remove_all(root);
    return c.report();
}

bool ninapro() {
    const char* dir = std::getenv("EMGAUTH_NINAPRO_DIR");
    if (dir == nullptr || !fs::exists(dir)) {
        std::cout << "SKIP  10 NinaPro DB7 reference medians (set EMGAUTH_NINAPRO_DIR to a converted dataset)"
                  << std::endl;
        return true;
    }
    Criterion c("10 NinaPro DB7 reference medians (TD, 4 channels, +-0.05)");
    const char* channels = std::getenv("EMGAUTH_NINAPRO_CHANNELS");
    try {
        const Dataset ds = load_dataset(dir);
        EvalConfig config;
        config.channels = cli::parse_int_list(channels ? channels : "0,1,2,3");
        const EvalReport r = evaluate(ds, config);
        const std::pair<Scenario, double> expected[] = {
            {Scenario::Normal, 0.064}, {Scenario::Leaked, 0.068}, {Scenario::Self, 0.235}};
        for (const auto& [s, v] : expected) {
            const double got = r.verification[static_cast<std::size_t>(s)]->eer.med;
            c.expect(std::fabs(got - v) <= 0.05, to_string(s) + " EER " + fmt(got));
            c.note(to_string(s) + " " + fmt(got));
        }
        const double r1e = r.identification.front().second.med;
        c.expect(std::fabs(r1e - 0.109) <= 0.05, "R1E " + fmt(r1e));
        c.note("R1E " + fmt(r1e));
    } catch (const std::exception& e) {
        c.expect(false, e.what());
    }
    return c.report();
}

} // namespace

int main() {
    bool ok = true;
    const auto guarded = [&](bool (*fn)(), const char* name) {
        try {
            ok = fn() && ok;
        } catch (const std::exception& e) {
            std::cout << "FAIL  " << name << "  (exception: " << e.what() << ")" << std::endl;
            ok = false;
        }
    };
    guarded(feature_oracles, "1 feature oracle suite");
    guarded(ar_recovery, "2 AR recovery");
    guarded(affine_invariance, "3 Mahalanobis affine invariance");
    guarded(eer_auc_oracle, "4 EER/AUC oracle");
    guarded(scenario_pools, "5 scenario pools");
    guarded(separability, "6 end-to-end separability");
    guarded(sfs_oracle, "7 SFS oracle");
    guarded(monotonicity, "8 monotonicity suite");
    guarded(determinism, "9 determinism");
    guarded(ninapro, "10 NinaPro DB7");
    return ok ? 0 : 1;
}
