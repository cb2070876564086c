// expectile: evaluate risky acts under disappointment aversion.
//
// Exit codes: 0 success, 1 property/check failure, 2 input error,
// 3 solver non-convergence, 4 cross-check divergence.

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expectiles/expectiles.hpp"

namespace ex = expectiles;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitCrossCheck = 4;

struct CommonOptions {
    std::string input;
    std::optional<double> beta;
    std::string algorithm = "iterative";
    bool cross_check = false;
    std::optional<double> tol;
    int max_iter = 200;
    std::string format = "json";
};

double resolve_beta(const ex::Document& doc, const std::optional<double>& flag) {
    if (flag) return *flag;
    if (doc.agent) return doc.agent->beta();
    throw std::invalid_argument("no beta given: pass --beta or an agent section");
}

ex::SolverConfig make_config(const CommonOptions& opt, const ex::UtilityAct& u) {
    ex::SolverConfig cfg = ex::SolverConfig::defaults_for(u);
    if (opt.tol) cfg.abs_tol = *opt.tol;
    cfg.max_iter = opt.max_iter;
    cfg.validate();
    return cfg;
}

double solve_with(const std::string& algorithm, const ex::UtilityAct& u, double beta,
                  const ex::SolverConfig& cfg) {
    if (algorithm == "balance") return ex::expectile_balance(u, beta, cfg);
    if (algorithm == "gul") return ex::gul_fixed_point(u, beta, cfg);
    if (algorithm == "iterative") return ex::iterative_reweighting(u, beta).first;
    if (algorithm == "als") return ex::als_minimize(u, beta, cfg);
    throw std::invalid_argument("unknown algorithm '" + algorithm +
                                "' (use balance|gul|iterative|als)");
}

ex::jout::Value labels_of(const ex::DisappointmentSet& d, const ex::FiniteSpace& space) {
    ex::jout::Value::Array a;
    for (std::size_t i : d.members) a.emplace_back(space.label(i));
    return ex::jout::Value(std::move(a));
}

void emit(const ex::jout::Value& v) { std::fputs(ex::jout::dump(v).c_str(), stdout); }

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const CommonOptions& opt) {
    const ex::Document doc = ex::load_document(opt.input);
    const double beta = resolve_beta(doc, opt.beta);
    if (doc.acts.empty()) throw std::invalid_argument("input has no acts");

    ex::jout::Value out;
    out["command"] = "eval";
    out["beta"] = beta;
    out["algorithm"] = opt.algorithm;
    ex::jout::Value::Array acts;
    for (const ex::NamedAct& named : doc.acts) {
        const ex::UtilityAct u = ex::resolve_act(named, doc.space, doc.agent);
        const ex::SolverConfig cfg = make_config(opt, u);
        const double value = solve_with(opt.algorithm, u, beta, cfg);
        const ex::DisappointmentSet d = ex::disappointment_set(u, value);
        const ex::Scenario q = ex::event_scenario(u.space(), d, beta);

        ex::jout::Value ja;
        ja["name"] = named.name;
        ja["value"] = value;
        ja["disappointment_set"] = labels_of(d, *doc.space);
        ja["scenario_density"] = ex::jout::from_doubles(q.density());
        ja["scenario_masses"] = ex::jout::from_doubles(q.masses());
        if (opt.cross_check) {
            ex::expectile(u, beta, cfg, /*cross_check=*/true); // throws on divergence
            const ex::CrossCheckReport r = ex::cross_checked_expectile(u, beta, cfg);
            ex::jout::Value jc;
            jc["balance"] = r.balance;
            jc["gul"] = r.gul;
            jc["iterative"] = r.iterative;
            jc["als"] = r.als;
            jc["max_discrepancy"] = r.max_discrepancy;
            ja["cross_check"] = std::move(jc);
        }
        acts.push_back(std::move(ja));
    }
    out["acts"] = ex::jout::Value(std::move(acts));

    if (opt.format == "json") {
        emit(out);
    } else {
        std::printf("beta = %.17g, algorithm = %s\n", beta, opt.algorithm.c_str());
        std::printf("%-16s %-22s %s\n", "act", "value", "disappointment set");
        for (const ex::NamedAct& named : doc.acts) {
            const ex::UtilityAct u = ex::resolve_act(named, doc.space, doc.agent);
            const double value = solve_with(opt.algorithm, u, beta, make_config(opt, u));
            const ex::DisappointmentSet d = ex::disappointment_set(u, value);
            std::string ds;
            for (std::size_t i : d.members) {
                if (!ds.empty()) ds += ",";
                ds += doc.space->label(i);
            }
            std::printf("%-16s %-22.17g {%s}\n", named.name.c_str(), value, ds.c_str());
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// trace
// ---------------------------------------------------------------------------

int cmd_trace(const CommonOptions& opt) {
    const ex::Document doc = ex::load_document(opt.input);
    const double beta = resolve_beta(doc, opt.beta);
    if (doc.acts.empty()) throw std::invalid_argument("input has no acts");

    ex::jout::Value out;
    out["command"] = "trace";
    out["beta"] = beta;
    ex::jout::Value::Array acts;
    for (const ex::NamedAct& named : doc.acts) {
        const ex::UtilityAct u = ex::resolve_act(named, doc.space, doc.agent);
        const auto [value, trace] = ex::iterative_reweighting(u, beta);
        ex::jout::Value ja;
        ja["name"] = named.name;
        ja["value"] = value;
        ja["steps"] = trace.steps;
        ja["converged"] = trace.converged;
        ex::jout::Value::Array rows;
        for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
            ex::jout::Value row;
            row["step"] = k;
            row["value"] = trace.iterates[k].value;
            row["masses"] = ex::jout::from_doubles(trace.iterates[k].masses);
            rows.push_back(std::move(row));
        }
        ja["rows"] = ex::jout::Value(std::move(rows));
        acts.push_back(std::move(ja));
        if (opt.format != "json") {
            std::printf("act %s (beta = %.17g)\n", named.name.c_str(), beta);
            std::printf("%-6s %-22s masses\n", "step", "v");
            for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
                std::printf("%-6zu %-22.17g", k, trace.iterates[k].value);
                for (double m : trace.iterates[k].masses) std::printf(" %.17g", m);
                std::printf("\n");
            }
        }
    }
    out["acts"] = ex::jout::Value(std::move(acts));
    if (opt.format == "json") emit(out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// dual
// ---------------------------------------------------------------------------

int cmd_dual(const CommonOptions& opt, bool brute_force, bool allow_large) {
    const ex::Document doc = ex::load_document(opt.input);
    const double beta = resolve_beta(doc, opt.beta);
    if (doc.acts.empty()) throw std::invalid_argument("input has no acts");

    ex::jout::Value out;
    out["command"] = "dual";
    out["beta"] = beta;
    ex::jout::Value::Array acts;
    for (const ex::NamedAct& named : doc.acts) {
        const ex::UtilityAct u = ex::resolve_act(named, doc.space, doc.agent);
        const double value = ex::expectile(u, beta);
        const ex::Scenario q = ex::optimal_scenario(u, beta);
        const ex::DisappointmentSet d = ex::disappointment_set(u, value);

        ex::jout::Value ja;
        ja["name"] = named.name;
        ja["value"] = value;
        ja["optimal_event"] = labels_of(d, *doc.space);
        ja["scenario_density"] = ex::jout::from_doubles(q.density());
        ja["scenario_masses"] = ex::jout::from_doubles(q.masses());
        ja["attained_value"] = ex::scenario_value(u, q);
        if (brute_force) {
            const ex::DualOptimum best = ex::brute_force_dual(u, beta, allow_large);
            ja["brute_force_value"] = best.value;
            ja["brute_force_event"] = labels_of(best.event, *doc.space);
            ex::jout::Value::Array table;
            for (const ex::EventValue& row : ex::brute_force_table(u, beta, allow_large)) {
                ex::jout::Value jr;
                jr["event"] = labels_of(row.event, *doc.space);
                jr["value"] = row.value;
                table.push_back(std::move(jr));
            }
            ja["event_table"] = ex::jout::Value(std::move(table));
        }
        acts.push_back(std::move(ja));
        if (opt.format != "json") {
            std::printf("act %s: value %.17g\n", named.name.c_str(), value);
            if (brute_force) {
                std::printf("%-28s %s\n", "event", "value");
                for (const ex::EventValue& row : ex::brute_force_table(u, beta, allow_large)) {
                    std::string es;
                    for (std::size_t i : row.event.members) {
                        if (!es.empty()) es += ",";
                        es += doc.space->label(i);
                    }
                    std::printf("{%-26s %.17g\n", (es + "}").c_str(), row.value);
                }
            }
        }
    }
    out["acts"] = ex::jout::Value(std::move(acts));
    if (opt.format == "json") emit(out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// axioms
// ---------------------------------------------------------------------------

std::function<double(const ex::UtilityAct&)> named_evaluator(const std::string& name) {
    if (name == "mean") return [](const ex::UtilityAct& u) { return u.mean(); };
    if (name == "max") return [](const ex::UtilityAct& u) { return u.max_value(); };
    if (name == "mad")
        return [](const ex::UtilityAct& u) {
            const double m = u.mean();
            double mad = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i)
                mad += u.space()->prob(i) * std::abs(u.value(i) - m);
            return mad;
        };
    if (name == "median" || name == "median-like")
        return [](const ex::UtilityAct& u) {
            return u.value(u.size() >= 2 ? 1 : 0); // value at the second state
        };
    const std::string prefix = "expectile:";
    if (name.rfind(prefix, 0) == 0) {
        const double beta = std::stod(name.substr(prefix.size()));
        return [beta](const ex::UtilityAct& u) { return ex::expectile(u, beta); };
    }
    throw std::invalid_argument("unknown evaluator '" + name +
                                "' (use mean|median|mad|max|expectile:<beta>)");
}

int cmd_axioms(const std::string& input, std::size_t states, std::vector<double> betas,
               int trials, std::uint64_t seed, double tol,
               std::vector<std::string> property_names, const std::string& fingerprint,
               const std::string& format) {
    if (trials < 1) throw std::invalid_argument("--trials must be >= 1");
    ex::SpacePtr space;
    if (!input.empty()) {
        space = ex::load_document(input).space;
    } else {
        if (states < 2) throw std::invalid_argument("--states must be >= 2");
        space = ex::FiniteSpace::uniform(states);
    }
    if (betas.empty()) betas = {-0.5, 0.0, 1.0};

    std::vector<ex::PropertyId> properties;
    if (property_names.empty()) {
        properties = ex::all_properties();
    } else {
        for (const std::string& name : property_names) {
            const auto id = ex::property_from_string(name);
            if (!id) throw std::invalid_argument("unknown property '" + name + "'");
            properties.push_back(*id);
        }
    }

    ex::jout::Value out;
    out["command"] = "axioms";
    out["seed"] = seed;
    out["trials"] = trials;
    out["tol"] = tol;
    ex::jout::Value::Array reports;
    int total_failures = 0;
    for (double beta : betas) {
        for (ex::PropertyId id : properties) {
            const ex::PropertyReport r = ex::run_property(id, space, beta, trials, seed, tol);
            total_failures += r.failures;
            ex::jout::Value jr;
            jr["property"] = ex::to_string(id);
            jr["beta"] = beta;
            jr["trials"] = r.trials;
            jr["failures"] = r.failures;
            jr["worst_violation"] = r.worst_violation;
            jr["seed"] = r.seed;
            reports.push_back(std::move(jr));
            if (format != "json")
                std::printf("%-26s beta=%-8.17g %-6s failures=%d/%d worst=%.3g\n",
                            ex::to_string(id), beta, r.failures == 0 ? "pass" : "FAIL",
                            r.failures, r.trials, r.worst_violation);
        }
    }
    out["reports"] = ex::jout::Value(std::move(reports));

    bool fingerprint_consistent = true;
    if (!fingerprint.empty()) {
        const ex::FingerprintResult fr =
            ex::fingerprint_functional(named_evaluator(fingerprint), space, trials, seed, tol);
        fingerprint_consistent = fr.consistent;
        ex::jout::Value jf;
        jf["evaluator"] = fingerprint;
        jf["verdict"] = fr.consistent ? "consistent" : "inconsistent";
        if (fr.beta_hat) jf["beta_hat"] = *fr.beta_hat;
        if (fr.witness) jf["witness"] = ex::jout::from_doubles(fr.witness->values());
        out["fingerprint"] = std::move(jf);
        if (format != "json")
            std::printf("fingerprint %-18s %s\n", fingerprint.c_str(),
                        fr.consistent ? "consistent" : "inconsistent");
    }

    out["failures"] = total_failures;
    if (format == "json") emit(out);
    return (total_failures == 0 && fingerprint_consistent) ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// sweep / infer-beta / compare
// ---------------------------------------------------------------------------

int cmd_sweep(const CommonOptions& opt, const std::vector<double>& betas) {
    const ex::Document doc = ex::load_document(opt.input);
    if (doc.acts.empty()) throw std::invalid_argument("input has no acts");
    if (betas.empty()) throw std::invalid_argument("--betas is required");

    ex::jout::Value out;
    out["command"] = "sweep";
    ex::jout::Value::Array acts;
    for (const ex::NamedAct& named : doc.acts) {
        const ex::UtilityAct u = ex::resolve_act(named, doc.space, doc.agent);
        const auto rows = ex::beta_sweep(u, betas);
        ex::jout::Value ja;
        ja["name"] = named.name;
        ex::jout::Value::Array jrows;
        for (const auto& [b, v] : rows) {
            ex::jout::Value jr;
            jr["beta"] = b;
            jr["value"] = v;
            jrows.push_back(std::move(jr));
        }
        ja["rows"] = ex::jout::Value(std::move(jrows));
        acts.push_back(std::move(ja));
        if (opt.format != "json") {
            std::printf("# act %s\n", named.name.c_str());
            for (const auto& [b, v] : rows) std::printf("%.17g %.17g\n", b, v);
        }
    }
    out["acts"] = ex::jout::Value(std::move(acts));
    if (opt.format == "json") emit(out);
    return kExitOk;
}

int cmd_infer_beta(const std::string& input, const std::vector<std::string>& event_labels,
                   std::optional<double> p_event, double win, double lose, double observed,
                   const std::string& format) {
    double pe;
    if (p_event) {
        pe = *p_event;
        if (!(pe > 0.0 && pe < 1.0))
            throw std::invalid_argument("--p-event must lie strictly in (0, 1)");
    } else {
        if (input.empty())
            throw std::invalid_argument("pass --p-event or --input with --event");
        const ex::Document doc = ex::load_document(input);
        std::vector<std::size_t> members;
        for (const std::string& label : event_labels) {
            bool found = false;
            for (std::size_t i = 0; i < doc.space->size(); ++i) {
                if (doc.space->label(i) == label) {
                    members.push_back(i);
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::invalid_argument("event state '" + label + "' not in space");
        }
        pe = 0.0;
        for (std::size_t i : members) pe += doc.space->prob(i);
        if (!(pe > 0.0 && pe < 1.0))
            throw std::invalid_argument("event must have probability strictly in (0, 1)");
    }
    // Closed-form inversion on a synthetic two-state space with P(E) = pe.
    const ex::SpacePtr binary =
        ex::FiniteSpace::create({"E", "D"}, {pe, 1.0 - pe});
    const double beta =
        ex::infer_beta(binary, ex::DisappointmentSet({0}), observed, win, lose);

    ex::jout::Value out;
    out["command"] = "infer-beta";
    out["p_event"] = pe;
    out["win"] = win;
    out["lose"] = lose;
    out["observed"] = observed;
    out["beta"] = beta;
    if (format == "json")
        emit(out);
    else
        std::printf("beta = %.17g\n", beta);
    return kExitOk;
}

int cmd_compare(const std::string& input_a, const std::string& input_b, int trials,
                std::uint64_t seed, const std::string& format) {
    const ex::Document da = ex::load_document(input_a);
    const ex::Document db = ex::load_document(input_b);
    if (!da.agent) throw std::invalid_argument(input_a + ": missing agent section");
    if (!db.agent) throw std::invalid_argument(input_b + ": missing agent section");

    const ex::AgentComparison cmp =
        ex::compare_agents(*da.agent, *db.agent, da.space, trials, seed);

    std::string summary;
    if (!cmp.affine_related) {
        summary = cmp.increasing_transform
                      ? "utilities are not affinely related"
                      : "utilities are related by a non-increasing transform";
    } else if (cmp.beta_geq && da.agent->beta() > db.agent->beta()) {
        summary = "A more disappointment averse than B";
    } else if (cmp.beta_geq) {
        summary = "A and B equally disappointment averse";
    } else {
        summary = "B more disappointment averse than A";
    }

    ex::jout::Value out;
    out["command"] = "compare";
    out["affine_related"] = cmp.affine_related;
    out["increasing_transform"] = cmp.increasing_transform;
    out["scale"] = cmp.scale;
    out["offset"] = cmp.offset;
    out["max_residual"] = cmp.max_residual;
    out["beta_a"] = da.agent->beta();
    out["beta_b"] = db.agent->beta();
    out["beta_order"] = cmp.beta_geq ? "A>=B" : "A<B";
    out["trials"] = cmp.trials;
    out["violations"] = cmp.violations;
    out["empirical_relation_holds"] = cmp.empirical_relation_holds;
    out["summary"] = summary;
    if (format == "json")
        emit(out);
    else
        std::printf("%s (scale=%.17g offset=%.17g, relation holds: %s)\n", summary.c_str(),
                    cmp.scale, cmp.offset, cmp.empirical_relation_holds ? "yes" : "no");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"disappointment-averse evaluation of risky acts via expectiles"};
    app.require_subcommand(1);

    CommonOptions opt;
    bool brute_force = false, allow_large = false;

    auto add_common = [&](CLI::App* sub, bool with_solver_flags) {
        sub->add_option("input", opt.input, "input document (.json or .csv)")->required();
        sub->add_option("--beta", opt.beta, "disappointment coefficient (> -1)");
        sub->add_option("--format", opt.format, "json|table")
            ->check(CLI::IsMember({"json", "table"}));
        if (with_solver_flags) {
            sub->add_option("--algorithm", opt.algorithm, "balance|gul|iterative|als")
                ->check(CLI::IsMember({"balance", "gul", "iterative", "als"}));
            sub->add_flag("--cross-check", opt.cross_check,
                          "run all four solvers and verify agreement");
            sub->add_option("--tol", opt.tol, "absolute tolerance override");
            sub->add_option("--max-iter", opt.max_iter, "iteration budget");
        }
    };

    CLI::App* eval = app.add_subcommand("eval", "expectiled value, worst-case scenario");
    add_common(eval, true);

    CLI::App* trace = app.add_subcommand("trace", "iterative reweighting trace");
    add_common(trace, false);

    CLI::App* dual = app.add_subcommand("dual", "maxmin scenario analysis");
    add_common(dual, false);
    dual->add_flag("--brute-force", brute_force, "enumerate all 2^n event scenarios");
    dual->add_flag("--allow-large", allow_large, "override the 24-state enumeration guard");

    std::string ax_input;
    std::size_t ax_states = 6;
    std::vector<double> ax_betas;
    int ax_trials = 400;
    std::uint64_t ax_seed = 20250810;
    double ax_tol = 1e-9;
    std::vector<std::string> ax_properties;
    std::string ax_fingerprint;
    std::string ax_format = "json";
    CLI::App* axioms = app.add_subcommand("axioms", "run the property/axiom suite");
    axioms->add_option("--input", ax_input, "take the space from this document");
    axioms->add_option("--states", ax_states, "uniform space size when no input is given");
    axioms->add_option("--beta", ax_betas, "betas to test")->delimiter(',');
    axioms->add_option("--trials", ax_trials, "trials per property per beta");
    axioms->add_option("--seed", ax_seed, "base seed recorded in every report");
    axioms->add_option("--tol", ax_tol, "violation tolerance");
    axioms->add_option("--properties", ax_properties, "subset of properties to run")
        ->delimiter(',');
    axioms->add_option("--fingerprint", ax_fingerprint,
                       "fingerprint a named evaluator (mean|median|mad|max|expectile:<beta>)");
    axioms->add_option("--format", ax_format, "json|table")
        ->check(CLI::IsMember({"json", "table"}));

    std::vector<double> sweep_betas;
    CLI::App* sweep = app.add_subcommand("sweep", "expectile across a beta grid");
    add_common(sweep, false);
    sweep->add_option("--betas", sweep_betas, "comma-separated beta list")->delimiter(',');

    std::string ib_input;
    std::vector<std::string> ib_event;
    std::optional<double> ib_p;
    double ib_win = 1.0, ib_lose = 0.0, ib_observed = 0.5;
    std::string ib_format = "json";
    CLI::App* infer = app.add_subcommand("infer-beta", "recover beta from a binary bet");
    infer->add_option("--input", ib_input, "document providing the space");
    infer->add_option("--event", ib_event, "winning states (labels)")->delimiter(',');
    infer->add_option("--p-event", ib_p, "winning probability, bypasses --input");
    infer->add_option("--win", ib_win, "utility of the winning outcome");
    infer->add_option("--lose", ib_lose, "utility of the losing outcome");
    infer->add_option("--observed", ib_observed, "observed certainty-equivalent value")
        ->required();
    infer->add_option("--format", ib_format, "json|table")
        ->check(CLI::IsMember({"json", "table"}));

    std::string cmp_a, cmp_b;
    int cmp_trials = 1000;
    std::uint64_t cmp_seed = 20250810;
    std::string cmp_format = "json";
    CLI::App* compare = app.add_subcommand("compare", "comparative disappointment aversion");
    compare->add_option("input_a", cmp_a, "document with agent A")->required();
    compare->add_option("input_b", cmp_b, "document with agent B")->required();
    compare->add_option("--trials", cmp_trials, "sampled (act, constant) pairs");
    compare->add_option("--seed", cmp_seed, "sampling seed");
    compare->add_option("--format", cmp_format, "json|table")
        ->check(CLI::IsMember({"json", "table"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    try {
        if (app.got_subcommand(eval)) return cmd_eval(opt);
        if (app.got_subcommand(trace)) return cmd_trace(opt);
        if (app.got_subcommand(dual)) return cmd_dual(opt, brute_force, allow_large);
        if (app.got_subcommand(axioms))
            return cmd_axioms(ax_input, ax_states, ax_betas, ax_trials, ax_seed, ax_tol,
                              ax_properties, ax_fingerprint, ax_format);
        if (app.got_subcommand(sweep)) return cmd_sweep(opt, sweep_betas);
        if (app.got_subcommand(infer))
            return cmd_infer_beta(ib_input, ib_event, ib_p, ib_win, ib_lose, ib_observed,
                                  ib_format);
        if (app.got_subcommand(compare))
            return cmd_compare(cmp_a, cmp_b, cmp_trials, cmp_seed, cmp_format);
    } catch (const ex::CrossCheckError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCrossCheck;
    } catch (const ex::SolverError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNoConvergence;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    }
    return kExitOk;
}
