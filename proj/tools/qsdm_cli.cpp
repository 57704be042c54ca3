// Command-line front end: solve / sweep / verify / simulate.
//
// Output is machine readable: JSON documents with a fixed key order and
// 9-significant-digit floats, or CSV for sweeps. Identical invocations
// produce byte-identical output.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsdm/analytic.hpp"
#include "qsdm/monte_carlo.hpp"
#include "qsdm/oracle.hpp"

namespace {

std::string fnum(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Minimal JSON emitter with explicit key order.
class JsonWriter {
  public:
    explicit JsonWriter(int indent) : indent_(indent) {}

    void open(char bracket) {
        pad_value();
        out_ << bracket;
        ++depth_;
        fresh_ = true;
    }
    void close(char bracket) {
        --depth_;
        if (!fresh_) newline();
        out_ << bracket;
        fresh_ = false;
    }
    void key(const std::string& k) {
        comma();
        newline();
        out_ << '"' << k << "\":";
        pending_value_ = true;
    }
    void value_raw(const std::string& v) {
        pad_value();
        out_ << v;
        fresh_ = false;
    }
    void value(double v) { value_raw(fnum(v)); }
    void value(int v) { value_raw(std::to_string(v)); }
    void value(const char* s) { value_raw(std::string("\"") + s + "\""); }
    void value(bool b) { value_raw(b ? "true" : "false"); }
    void element() {
        comma();
        newline();
    }

    std::string str() const { return out_.str(); }

  private:
    void comma() {
        if (!fresh_) out_ << ',';
    }
    void newline() {
        if (indent_ > 0) {
            out_ << '\n';
            for (int i = 0; i < depth_ * indent_; ++i) out_ << ' ';
        }
        fresh_ = true;
    }
    void pad_value() {
        if (pending_value_) {
            if (indent_ > 0) out_ << ' ';
            pending_value_ = false;
        } else if (!fresh_) {
            comma();
            newline();
        }
        fresh_ = false;
    }

    std::ostringstream out_;
    int indent_;
    int depth_ = 0;
    bool fresh_ = true;
    bool pending_value_ = false;
};

void write_vector(JsonWriter& w, const qsdm::Vec3& v) {
    w.open('[');
    w.element();
    w.value(v.x);
    w.element();
    w.value(v.y);
    w.element();
    w.value(v.z);
    w.close(']');
}

int element_rank(const qsdm::BlochOperator& e) {
    int rank = 0;
    if (qsdm::min_eigenvalue(e) > 1e-9) ++rank;
    if (qsdm::max_eigenvalue(e) > 1e-9) ++rank;
    return rank;
}

void write_povm(JsonWriter& w, const qsdm::Povm& p) {
    static const char* labels[4] = {"E0", "E1", "E2", "E3"};
    w.open('[');
    for (int mu = 0; mu < 4; ++mu) {
        const auto& e = p.elements[static_cast<std::size_t>(mu)];
        w.element();
        w.open('{');
        w.key("label");
        w.value(labels[mu]);
        w.key("scale");
        w.value(e.scale);
        w.key("vector");
        write_vector(w, e.vector);
        w.key("eigenvalues");
        w.open('[');
        w.element();
        w.value(qsdm::min_eigenvalue(e));
        w.element();
        w.value(qsdm::max_eigenvalue(e));
        w.close(']');
        w.key("rank");
        w.value(element_rank(e));
        w.close('}');
    }
    w.close(']');
}

void write_certificate(JsonWriter& w, const qsdm::DualCertificate& c) {
    w.open('{');
    w.key("y");
    w.value(c.y);
    w.key("Y_scale");
    w.value(c.Y.scale);
    w.key("Y_vector");
    write_vector(w, c.Y.vector);
    w.key("d");
    w.value(c.bound);
    w.close('}');
}

void write_parameters(JsonWriter& w, double r, double gamma, double m) {
    w.open('{');
    w.key("r");
    w.value(r);
    w.key("gamma");
    w.value(gamma);
    w.key("margin");
    w.value(m);
    w.close('}');
}

int cmd_solve(double r, double gamma, double m, int indent) {
    const qsdm::Solution sol = qsdm::solve(r, gamma, m);
    const qsdm::CriticalMargins cm = qsdm::critical_margins(r, gamma);

    JsonWriter w(indent);
    w.open('{');
    w.key("parameters");
    write_parameters(w, r, gamma, m);
    w.key("domain");
    w.value(qsdm::domain_label(sol.domain));
    w.key("p_success");
    w.value(sol.p_success);
    w.key("p_error");
    w.value(sol.p_error);
    w.key("p_inconclusive");
    w.value(sol.p_inconclusive);
    w.key("critical_margins");
    w.open('{');
    w.key("m_lower");
    w.value(cm.m_lower);
    w.key("m_upper");
    w.value(cm.m_upper);
    w.close('}');
    w.key("povm");
    write_povm(w, sol.povm);
    w.key("certificate");
    write_certificate(w, sol.certificate);
    w.key("gap");
    w.value(sol.gap);
    w.key("povm_source");
    w.value(sol.povm_is_numeric ? "numeric" : "analytic");
    w.close('}');
    std::cout << w.str() << "\n";
    return 0;
}

int cmd_sweep(double r, double gamma, int steps, const std::string& out_path) {
    const qsdm::CriticalMargins cm = qsdm::critical_margins(r, gamma);
    std::ostringstream csv;
    csv << "m,p_max,p_error,p_inconclusive,domain\n";
    for (int k = 0; k <= steps; ++k) {
        const double m = static_cast<double>(k) / steps;
        auto [p, dom] = qsdm::max_success(r, gamma, m);
        // p_error saturates the margin whenever y > 0 and freezes at m_upper
        // on the minimum-error plateau
        const double pe = std::min(m, cm.m_upper);
        double pq = 1.0 - p - pe;
        if (std::abs(pq) < 1e-9) pq = 0.0;
        char line[160];
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f,%s\n", m, p, pe, pq,
                      qsdm::domain_label(dom));
        csv << line;
    }
    if (out_path == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream f(out_path);
        if (!f) {
            std::cerr << "error: cannot open " << out_path << " for writing\n";
            return 3;
        }
        f << csv.str();
        if (!f.good()) {
            std::cerr << "error: write to " << out_path << " failed\n";
            return 3;
        }
    }
    return 0;
}

void write_report(JsonWriter& w, const qsdm::VerificationReport& rep) {
    w.open('{');
    w.key("povm_min_eig");
    w.value(rep.povm_min_eig);
    w.key("completeness_residual");
    w.value(rep.completeness_residual);
    w.key("dual_slacks");
    w.open('[');
    for (double s : rep.dual_slacks) {
        w.element();
        w.value(s);
    }
    w.close(']');
    w.key("attainability_residuals");
    w.open('[');
    for (double s : rep.attainability_residuals) {
        w.element();
        w.value(s);
    }
    w.close(']');
    w.key("gap");
    w.value(rep.gap);
    w.key("pass");
    w.value(rep.pass);
    w.close('}');
}

int cmd_verify(double r, double gamma, double m, bool grid, std::uint64_t seed, int indent) {
    const qsdm::Solution sol = qsdm::solve(r, gamma, m, seed);
    const qsdm::Ensemble ens = qsdm::to_ensemble(qsdm::build_family(r, gamma));
    const qsdm::DualSearchResult dual = qsdm::minimize_dual(ens, m);
    const qsdm::PrimalSearchResult primal = qsdm::primal_search(ens, m, seed);

    const auto tol = sol.povm_is_numeric ? qsdm::VerifyTolerances::numeric_pair()
                                         : qsdm::VerifyTolerances::analytic_pair();
    const qsdm::VerificationReport rep = qsdm::verify(ens, m, sol.povm, sol.certificate, tol);
    const double agreement = std::abs(dual.d_star - sol.p_success);
    const double primal_agreement = std::abs(primal.p_success - sol.p_success);

    bool pass = rep.pass && agreement <= 1e-6 && primal_agreement <= 1e-5;

    JsonWriter w(indent);
    w.open('{');
    w.key("parameters");
    write_parameters(w, r, gamma, m);
    w.key("report");
    write_report(w, rep);
    w.key("d_oracle");
    w.value(dual.d_star);
    w.key("p_analytic");
    w.value(sol.p_success);
    w.key("p_primal_oracle");
    w.value(primal.p_success);
    w.key("dual_agreement");
    w.value(agreement);
    w.key("primal_agreement");
    w.value(primal_agreement);
    w.key("povm_source");
    w.value(sol.povm_is_numeric ? "numeric" : "analytic");

    if (grid) {
        double worst = 0.0;
        bool grid_pass = true;
        for (int gi = 0; gi <= 20; ++gi) {
            const double g = -0.5 + 1.5 * gi / 20.0;
            for (int mi = 0; mi <= 20; ++mi) {
                const double mm = static_cast<double>(mi) / 20.0;
                const auto [p, dom] = qsdm::max_success(1.0, g, mm);
                const qsdm::DualSearchResult ds =
                    qsdm::minimize_dual(qsdm::to_ensemble(qsdm::build_family(1.0, g)), mm);
                worst = std::max(worst, std::abs(ds.d_star - p));
                if (std::abs(ds.d_star - p) > 1e-6) grid_pass = false;
            }
        }
        w.key("grid");
        w.open('{');
        w.key("points");
        w.value(21 * 21);
        w.key("max_dual_agreement_error");
        w.value(worst);
        w.key("pass");
        w.value(grid_pass);
        w.close('}');
        pass = pass && grid_pass;
    }

    w.key("pass");
    w.value(pass);
    w.close('}');
    std::cout << w.str() << "\n";
    return pass ? 0 : 1;
}

int cmd_simulate(double r, double gamma, double m, std::int64_t shots, std::uint64_t seed,
                 int indent) {
    const qsdm::Solution sol = qsdm::solve(r, gamma, m, seed);
    const qsdm::Ensemble ens = qsdm::to_ensemble(qsdm::build_family(r, gamma));
    const qsdm::SimulationStats stats = qsdm::simulate(ens, sol.povm, shots, seed);

    auto zscore = [&](double hat, double ref) {
        const double se = std::sqrt(hat * (1.0 - hat) / static_cast<double>(shots));
        if (se == 0.0) return std::abs(hat - ref) < 1e-12 ? 0.0 : 1e12;
        return (hat - ref) / se;
    };

    JsonWriter w(indent);
    w.open('{');
    w.key("parameters");
    write_parameters(w, r, gamma, m);
    w.key("shots");
    w.value_raw(std::to_string(stats.shots));
    w.key("seed");
    w.value_raw(std::to_string(stats.seed));
    w.key("generator");
    w.value(stats.generator.c_str());
    w.key("counts");
    w.open('[');
    for (const auto& row : stats.counts) {
        w.element();
        w.open('[');
        for (auto c : row) {
            w.element();
            w.value_raw(std::to_string(c));
        }
        w.close(']');
    }
    w.close(']');
    w.key("p_success_hat");
    w.value(stats.p_success_hat);
    w.key("p_error_hat");
    w.value(stats.p_error_hat);
    w.key("p_inconclusive_hat");
    w.value(stats.p_inconclusive_hat);
    w.key("stderr_success");
    w.value(stats.stderr_success);
    w.key("z_success");
    w.value(zscore(stats.p_success_hat, sol.p_success));
    w.key("z_error");
    w.value(zscore(stats.p_error_hat, sol.p_error));
    w.key("z_inconclusive");
    w.value(zscore(stats.p_inconclusive_hat, sol.p_inconclusive));
    w.close('}');
    std::cout << w.str() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal discrimination with an error margin for three symmetric qubit states"};
    app.require_subcommand(1);

    double gamma = 0.0, r = 1.0, margin = 0.0;
    int indent = 2, steps = 200;
    std::string out_path = "-";
    std::int64_t shots = 1000000;
    std::uint64_t seed = 0;
    bool grid = false;

    auto* solve = app.add_subcommand("solve", "closed-form solution at one parameter point");
    solve->add_option("--gamma", gamma)->required();
    solve->add_option("--r", r);
    solve->add_option("--margin", margin)->required();
    solve->add_option("--json-indent", indent);

    auto* sweep = app.add_subcommand("sweep", "CSV of p_max vs error margin");
    sweep->add_option("--gamma", gamma)->required();
    sweep->add_option("--r", r);
    sweep->add_option("--steps", steps)->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_path);

    auto* verify = app.add_subcommand("verify", "cross-check analytic solution against the oracle");
    verify->add_option("--gamma", gamma)->required();
    verify->add_option("--r", r);
    verify->add_option("--margin", margin)->required();
    verify->add_flag("--grid", grid);
    verify->add_option("--seed", seed);
    verify->add_option("--json-indent", indent);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo measurement statistics");
    simulate->add_option("--gamma", gamma)->required();
    simulate->add_option("--r", r);
    simulate->add_option("--margin", margin)->required();
    simulate->add_option("--shots", shots)->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed);
    simulate->add_option("--json-indent", indent);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) return cmd_solve(r, gamma, margin, indent);
        if (sweep->parsed()) return cmd_sweep(r, gamma, steps, out_path);
        if (verify->parsed()) return cmd_verify(r, gamma, margin, grid, seed, indent);
        if (simulate->parsed()) return cmd_simulate(r, gamma, margin, shots, seed, indent);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
