#include "confmdp/experiment.hpp"

#include <cstdio>
#include <fstream>

namespace confmdp {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace

void write_iterations_csv(std::ostream& out, const RunResult& result, std::size_t n_vertices) {
    out << "iteration,j,alpha,beta,adv_policy,adv_model,bound_value,d_e_pi,d_inf_pi,d_e_p,d_inf_p";
    for (std::size_t i = 0; i < n_vertices; ++i) out << ",omega_" << i;
    out << ",target_policy_id,target_model_id\n";
    for (const IterationRecord& r : result.records) {
        out << r.iteration << ',' << fmt(r.j) << ',' << fmt(r.alpha) << ',' << fmt(r.beta) << ','
            << fmt(r.adv_policy) << ',' << fmt(r.adv_model) << ',' << fmt(r.bound_value) << ',' << fmt(r.d_e_pi)
            << ',' << fmt(r.d_inf_pi) << ',' << fmt(r.d_e_p) << ',' << fmt(r.d_inf_p);
        for (std::size_t i = 0; i < n_vertices; ++i) out << ',' << fmt(r.omega ? (*r.omega)[i] : 0.0);
        out << ',' << r.target_policy_id << ',' << r.target_model_id << '\n';
    }
}

void write_summary(std::ostream& out, const RunConfig& config, const RunResult& result) {
    out << "environment = " << environment_key(config) << '\n';
    out << "strategy = " << to_string(config.solver.strategy) << '\n';
    out << "target_mode = " << to_string(config.solver.target_mode) << '\n';
    out << "final_j = " << fmt(result.final_j) << '\n';
    out << "iterations = " << result.records.size() << '\n';
    out << "converged = " << (result.converged() ? "true" : "false") << '\n';
    out << "termination = " << to_string(result.reason) << '\n';
    if (result.final_state.omega) {
        out << "final_omega = ";
        const numvec& w = *result.final_state.omega;
        for (std::size_t i = 0; i < w.size(); ++i) out << (i ? ", " : "") << fmt(w[i]);
        out << '\n';
    }
}

RunResult solve(const RunConfig& config) {
    const Problem problem = build_problem(config);
    return run(problem, config.solver);
}

ExperimentOutput run_experiment(const RunConfig& config, const std::filesystem::path& out_dir) {
    const Problem problem = build_problem(config);
    ExperimentOutput out;
    out.result = run(problem, config.solver);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    out.iterations_csv = out_dir / "iterations.csv";
    out.summary = out_dir / "summary.txt";

    std::ofstream csv = open_output(out.iterations_csv);
    write_iterations_csv(csv, out.result, problem.model_space.vertices.size());
    check_written(csv, out.iterations_csv);
    std::ofstream summary = open_output(out.summary);
    write_summary(summary, config, out.result);
    check_written(summary, out.summary);
    return out;
}

ExperimentOutput run_experiment(const RunConfig& config) { return run_experiment(config, config.output_dir); }

std::vector<ComparisonRow> compare_strategies(const std::vector<RunConfig>& configs,
                                              const std::filesystem::path& out_dir) {
    if (configs.size() < 2) throw UsageError("compare needs at least two configs");
    const std::string key = environment_key(configs.front());
    for (const RunConfig& c : configs) {
        if (environment_key(c) != key || c.gamma != configs.front().gamma) {
            throw UsageError("compare: configs describe different environments ('" + key + "' vs '" +
                             environment_key(c) + "')");
        }
    }

    std::vector<ComparisonRow> rows(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const RunConfig& c = configs[i];
        char label[64];
        std::snprintf(label, sizeof label, "%02zu_%s_%s", i, to_string(c.solver.strategy).c_str(),
                      to_string(c.solver.target_mode).c_str());
        const ExperimentOutput out = run_experiment(c, out_dir / label);
        rows[i] = {label, c.solver.strategy, c.solver.target_mode, out.result.final_j, out.result.records.size(),
                   out.result.reason};
    }

    const auto path = out_dir / "comparison.csv";
    std::ofstream csv = open_output(path);
    csv << "run,strategy,target_mode,final_j,iterations,termination\n";
    for (const ComparisonRow& r : rows) {
        csv << r.label << ',' << to_string(r.strategy) << ',' << to_string(r.target_mode) << ',' << fmt(r.final_j)
            << ',' << r.iterations << ',' << to_string(r.reason) << '\n';
    }
    check_written(csv, path);
    return rows;
}

} // namespace confmdp
