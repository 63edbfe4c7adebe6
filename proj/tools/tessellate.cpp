// tessellate: train, evaluate, and benchmark tessellated-kernel SVM models.
//
// Exit codes: 0 success, 2 flag errors, 3 data errors, 4 numerical failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tkl/tkl.hpp"

namespace {

constexpr int kExitFlags = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int resolve_threads_flag(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("TESSELLATE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // library default: hardware concurrency
}

tkl::Dataset load_dataset(const std::string& path, const std::string& format) {
    if (format == "csv") return tkl::parse_csv(path);
    return tkl::parse_sparse_svm(path);
}

tkl::Task resolve_task(const std::string& task_flag, const tkl::Vector& targets) {
    if (task_flag == "classify") {
        if (!tkl::detect_classification(targets))
            throw std::runtime_error(
                "classification requires exactly two distinct target values");
        return tkl::Task::classification;
    }
    if (task_flag == "regress") return tkl::Task::regression;
    return tkl::detect_classification(targets) ? tkl::Task::classification
                                               : tkl::Task::regression;
}

// "C=0.1,1,10;delta=0.25,0.5" -> two value lists.
void parse_cv_grid(const std::string& text, std::vector<double>& C_grid,
                   std::vector<double>& delta_grid) {
    std::istringstream parts(text);
    std::string part;
    while (std::getline(parts, part, ';')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--cv", "expected key=v1,v2,... in '" + part + "'");
        const std::string key = part.substr(0, eq);
        std::vector<double>* dest = nullptr;
        if (key == "C")
            dest = &C_grid;
        else if (key == "delta")
            dest = &delta_grid;
        else
            throw CLI::ValidationError("--cv", "unknown grid key '" + key + "'");
        std::istringstream vals(part.substr(eq + 1));
        std::string v;
        while (std::getline(vals, v, ',')) {
            try {
                dest->push_back(std::stod(v));
            } catch (const std::exception&) {
                throw CLI::ValidationError("--cv", "invalid number '" + v + "'");
            }
        }
        if (dest->empty())
            throw CLI::ValidationError("--cv", "empty value list for '" + key + "'");
    }
}

void write_trace_csv(const std::string& path, const std::vector<tkl::IterationRecord>& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    out << "k,primal,dual,gap,step,t_opt_a_ms,t_opt_p_ms,t_linesearch_ms,tau,sigma,theta\n";
    out.precision(17);
    for (const auto& r : trace)
        out << r.k << ',' << r.primal << ',' << r.dual << ',' << r.gap << ',' << r.step << ','
            << r.t_opt_a_ms << ',' << r.t_opt_p_ms << ',' << r.t_linesearch_ms << ',' << r.tau
            << ',' << r.sigma << ',' << r.theta << '\n';
}

struct TrainArgs {
    std::string data, format = "svm", task = "auto", algorithm = "fw", cv, model_out, trace_out;
    int degree = 1, maxit = 100, n_gamma = 10, seed = 0, threads = 0;
    double delta = 0.5, C = 1.0, epsilon = 0.1, tol = 0.01;
    double apd_mu = 0.0, apd_c_scale = 0.0;  // 0 = library auto defaults
};

int cmd_train(const TrainArgs& a) {
    tkl::Dataset data;
    tkl::TrainConfig cfg;
    try {
        data = load_dataset(a.data, a.format);
        cfg.task = resolve_task(a.task, data.targets);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    cfg.degree = a.degree;
    cfg.delta = a.delta;
    cfg.C = a.C;
    cfg.epsilon_tube = a.epsilon;
    cfg.tol = a.tol;
    cfg.maxit = a.maxit;
    cfg.n_gamma = a.n_gamma;
    cfg.threads = resolve_threads_flag(a.threads);
    cfg.apd_mu = a.apd_mu;
    cfg.apd_c_scale = a.apd_c_scale;
    if (a.algorithm == "apd")
        cfg.algorithm = tkl::Algorithm::apd;
    else if (a.algorithm == "hybrid")
        cfg.algorithm = tkl::Algorithm::hybrid;

    try {
        if (!a.cv.empty()) {
            std::vector<double> C_grid, delta_grid;
            parse_cv_grid(a.cv, C_grid, delta_grid);
            if (C_grid.empty()) C_grid.push_back(cfg.C);
            if (delta_grid.empty()) delta_grid.push_back(cfg.delta);
            const tkl::CVResult cv = tkl::kfold_cv(data.samples, data.targets, cfg, C_grid,
                                                   delta_grid, 2, static_cast<unsigned>(a.seed));
            cfg.C = cv.C;
            cfg.delta = cv.delta;
            std::cout << "cv_C," << cv.C << "\ncv_delta," << cv.delta << "\ncv_score,"
                      << cv.score << '\n';
        }
        const tkl::FitOutput out = tkl::fit(data.samples, data.targets, cfg);
        if (!a.model_out.empty()) out.model.save(a.model_out);
        if (!a.trace_out.empty()) write_trace_csv(a.trace_out, out.result.trace);
        std::cout << "primal," << out.result.primal << "\ngap," << out.result.final_gap
                  << "\nconverged," << (out.result.converged ? 1 : 0) << "\nsupport_vectors,"
                  << out.model.support_count() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}

struct EvalArgs {
    std::string model, data, format = "svm", out;
};

int load_model_and_data(const EvalArgs& a, tkl::TKPredictor& model, tkl::Dataset& data) {
    try {
        model = tkl::TKPredictor::load(a.model);
        data = load_dataset(a.data, a.format);
        if (data.n_features() != model.basis.n_features)
            throw std::runtime_error("model expects " +
                                     std::to_string(model.basis.n_features) +
                                     " features, data has " + std::to_string(data.n_features()));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}

int cmd_predict(const EvalArgs& a) {
    tkl::TKPredictor model;
    tkl::Dataset data;
    if (int rc = load_model_and_data(a, model, data)) return rc;
    try {
        std::ostream* os = &std::cout;
        std::ofstream file;
        if (!a.out.empty()) {
            file.open(a.out);
            if (!file) throw std::runtime_error("cannot open output file: " + a.out);
            os = &file;
        }
        os->precision(17);
        *os << "prediction\n";
        for (const auto& x : data.samples) *os << model.predict(x) << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}

int cmd_evaluate(const EvalArgs& a) {
    tkl::TKPredictor model;
    tkl::Dataset data;
    if (int rc = load_model_and_data(a, model, data)) return rc;
    try {
        std::cout.precision(17);
        if (model.task == tkl::Task::classification) {
            std::cout << "accuracy," << tkl::evaluate_accuracy(model, data.samples, data.targets)
                      << '\n';
        } else {
            std::cout << "mse," << tkl::evaluate_mse(model, data.samples, data.targets) << '\n';
        }
        std::cout << "samples," << data.size() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}

int cmd_validate_kernel(std::size_t n, int degree, int trials, unsigned seed, bool inject_fault) {
    try {
        const auto cfg = tkl::TKBasisConfig::unit_box(n, degree, 0.5);
        const auto table = tkl::enumerate_exponents(n, degree);
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> pick(0, table.n_p() - 1);
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            const std::size_t i = pick(rng), j = pick(rng);
            tkl::Vector x(n), y(n);
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = unit(rng);
                y[k] = unit(rng);
            }
            double got = tkl::eval_G(i, j, x, y, cfg, table);
            if (inject_fault) got += 1e-6;
            const double want = tkl::quadrature_oracle_G(i, j, x, y, cfg, table);
            worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
        }
        std::cout << "max_relative_error," << worst << '\n';
        return worst <= 1e-9 ? 0 : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

struct BenchRow {
    std::string mode;
    std::size_t m = 0, n_p = 0, rank = 0;
    std::string phase;
    double mean_ms = 0.0, std_ms = 0.0;
};

void print_bench(const std::vector<BenchRow>& rows) {
    std::cout << "mode,m,n_P,rank,phase,mean_ms,std_ms\n";
    for (const auto& r : rows)
        std::cout << r.mode << ',' << r.m << ',' << r.n_p << ',' << r.rank << ',' << r.phase
                  << ',' << r.mean_ms << ',' << r.std_ms << '\n';
}

// Two-class checkerboard points in the unit square.
void checkerboard(std::size_t m, unsigned seed, std::vector<tkl::Vector>& X, tkl::Vector& y,
                  int cells = 2) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    X.clear();
    y.clear();
    for (std::size_t i = 0; i < m; ++i) {
        const double a = unit(rng), b = unit(rng);
        X.push_back({a, b});
        const int cell = static_cast<int>(a * cells) + static_cast<int>(b * cells);
        y.push_back(cell % 2 == 0 ? 1.0 : -1.0);
    }
}

struct Stats {
    double mean = 0.0, stddev = 0.0;
};

Stats summarize(const std::vector<double>& xs) {
    Stats s;
    for (double v : xs) s.mean += v;
    s.mean /= static_cast<double>(xs.size());
    for (double v : xs) s.stddev += (v - s.mean) * (v - s.mean);
    s.stddev = xs.size() > 1 ? std::sqrt(s.stddev / static_cast<double>(xs.size() - 1)) : 0.0;
    return s;
}

// Trace-renormalized random P of the given rank: sum of normalized random
// rank-1 terms, scaled so trace(P) = n_P.
tkl::SymmetricMatrix random_rank_p(std::size_t n_p, std::size_t rank, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    tkl::SymmetricMatrix P(n_p);
    for (std::size_t r = 0; r < rank; ++r) {
        tkl::Vector v(n_p);
        double norm = 0.0;
        for (double& vi : v) {
            vi = gauss(rng);
            norm += vi * vi;
        }
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n_p; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                P.set(i, j, P.at(i, j) + v[i] * v[j] / norm);
    }
    const double scale = static_cast<double>(n_p) / P.trace();
    return P.scaled(scale);
}

int cmd_bench(const std::string& mode, unsigned seed, int threads) {
    try {
        std::vector<BenchRow> rows;
        const int nthreads = resolve_threads_flag(threads);
        if (mode == "iteration-scaling") {
            for (std::size_t m : {100u, 200u, 400u, 800u}) {
                std::vector<tkl::Vector> X;
                tkl::Vector y;
                checkerboard(m, seed, X, y);
                tkl::TrainConfig cfg;
                cfg.task = tkl::Task::classification;
                cfg.C = 10.0;
                cfg.maxit = 6;
                cfg.tol = 0.0;
                cfg.threads = nthreads;
                const auto basis = tkl::TKBasisConfig::unit_box(2, 1, 0.5);
                const auto table = tkl::enumerate_exponents(2, 1);
                tkl::KernelContext ctx(basis, table, X, cfg.cache_budget_bytes, nthreads);
                const auto result = tkl::train_fw(ctx, y, cfg);
                std::vector<double> t_a, t_p, t_ls;
                for (const auto& r : result.trace) {
                    t_a.push_back(r.t_opt_a_ms);
                    t_p.push_back(r.t_opt_p_ms);
                    t_ls.push_back(r.t_linesearch_ms);
                }
                for (const auto& [phase, xs] :
                     {std::pair<std::string, std::vector<double>*>{"opt_a", &t_a},
                      {"opt_p", &t_p},
                      {"linesearch", &t_ls}}) {
                    const Stats s = summarize(*xs);
                    rows.push_back({mode, m, table.n_p(), 0, phase, s.mean, s.stddev});
                }
            }
        } else if (mode == "eig-vs-m") {
            for (std::size_t m : {200u, 2000u}) {
                std::vector<tkl::Vector> X;
                tkl::Vector y;
                checkerboard(m, seed, X, y);
                const auto basis = tkl::TKBasisConfig::unit_box(2, 1, 0.5);
                const auto table = tkl::enumerate_exponents(2, 1);
                tkl::KernelContext ctx(basis, table, X, 2ull << 30, nthreads);
                tkl::Vector w(m);
                std::mt19937 rng(seed);
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                for (std::size_t i = 0; i < m; ++i) w[i] = y[i] * unit(rng);
                const tkl::SymmetricMatrix D = ctx.assemble_D(w);
                std::vector<double> times;
                for (int rep = 0; rep < 20; ++rep) {
                    const auto t0 = std::chrono::steady_clock::now();
                    volatile double sink = tkl::extremal_eigpair(D, true).first;
                    (void)sink;
                    times.push_back(std::chrono::duration<double, std::milli>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count());
                }
                const Stats s = summarize(times);
                rows.push_back({mode, m, table.n_p(), 0, "eig", s.mean, s.stddev});
            }
        } else {  // rank-iterations
            // 4-feature nonlinear two-class data; kernel-target alignment
            // matters here, which is what separates optimal from random P.
            std::vector<tkl::Vector> X;
            tkl::Vector y;
            {
                std::mt19937 rng(seed + 5);
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                for (int i = 0; i < 200; ++i) {
                    tkl::Vector x(4);
                    for (double& v : x) v = unit(rng);
                    const double s = x[0] * x[0] + std::sin(3.0 * x[1]) + x[2] * x[3];
                    X.push_back(x);
                    y.push_back(s > 0.9 ? 1.0 : -1.0);
                }
            }
            tkl::TrainConfig cfg;
            cfg.task = tkl::Task::classification;
            cfg.C = 10.0;
            cfg.maxit = 100;
            cfg.tol = 1e-4;
            cfg.threads = nthreads;
            const auto basis = tkl::TKBasisConfig::unit_box(4, 1, 0.5);
            const auto table = tkl::enumerate_exponents(4, 1);
            tkl::KernelContext ctx(basis, table, X, cfg.cache_budget_bytes, nthreads);
            const auto fw = tkl::train_fw(ctx, y, cfg);
            const auto opt = tkl::opt_p(fw.alpha, ctx, y, cfg);  // rank-1 near-optimal P
            std::mt19937 rng(seed);

            const auto count_iters = [&](const tkl::SymmetricMatrix& P) {
                const auto K = ctx.kernel_matrix(P);
                return tkl::solve_svc_dual(K, y, cfg.C, 0.1).iterations;
            };
            rows.push_back({mode, 200, table.n_p(), 1, "smo_iterations",
                            static_cast<double>(count_iters(opt.S)), 0.0});
            std::vector<double> rand_iters;
            const std::size_t rank = table.n_p() / 2 + table.n_p() % 2;
            for (int rep = 0; rep < 5; ++rep)
                rand_iters.push_back(
                    static_cast<double>(count_iters(random_rank_p(table.n_p(), rank, rng))));
            const Stats s = summarize(rand_iters);
            rows.push_back({mode, 200, table.n_p(), rank, "smo_iterations", s.mean, s.stddev});
        }
        print_bench(rows);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tessellated-kernel SVM learning"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a model");
    train->add_option("--data", ta.data, "training data path")->required();
    train->add_option("--format", ta.format)->check(CLI::IsMember({"svm", "csv"}));
    train->add_option("--task", ta.task)->check(CLI::IsMember({"auto", "classify", "regress"}));
    train->add_option("--degree", ta.degree)->check(CLI::NonNegativeNumber);
    train->add_option("--delta", ta.delta)->check(CLI::PositiveNumber);
    train->add_option("--C", ta.C)->check(CLI::PositiveNumber);
    train->add_option("--epsilon", ta.epsilon)->check(CLI::NonNegativeNumber);
    train->add_option("--algorithm", ta.algorithm)
        ->check(CLI::IsMember({"fw", "apd", "hybrid"}));
    train->add_option("--tol", ta.tol)->check(CLI::PositiveNumber);
    train->add_option("--maxit", ta.maxit)->check(CLI::PositiveNumber);
    train->add_option("--n-gamma", ta.n_gamma)->check(CLI::PositiveNumber);
    train->add_option("--apd-mu", ta.apd_mu, "strong-convexity constant (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--apd-c-scale", ta.apd_c_scale, "coupling constant in L_aP (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--cv", ta.cv, "grid, e.g. \"C=0.1,1,10;delta=0.25,0.5\"");
    train->add_option("--seed", ta.seed);
    train->add_option("--model-out", ta.model_out);
    train->add_option("--trace-out", ta.trace_out);
    train->add_option("--threads", ta.threads);

    EvalArgs pa, ea;
    auto* predict = app.add_subcommand("predict", "Predict with a saved model");
    predict->add_option("--model", pa.model)->required();
    predict->add_option("--data", pa.data)->required();
    predict->add_option("--format", pa.format)->check(CLI::IsMember({"svm", "csv"}));
    predict->add_option("--out", pa.out, "output path (default: standard output)");

    auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on labeled data");
    evaluate->add_option("--model", ea.model)->required();
    evaluate->add_option("--data", ea.data)->required();
    evaluate->add_option("--format", ea.format)->check(CLI::IsMember({"svm", "csv"}));

    std::size_t vk_n = 2;
    int vk_degree = 1, vk_trials = 500, vk_seed = 0;
    bool vk_fault = false;
    auto* validate = app.add_subcommand("validate-kernel",
                                        "Check the kernel formula against exact integration");
    validate->add_option("--n", vk_n)->check(CLI::PositiveNumber);
    validate->add_option("--degree", vk_degree)->check(CLI::NonNegativeNumber);
    validate->add_option("--trials", vk_trials)->check(CLI::PositiveNumber);
    validate->add_option("--seed", vk_seed);
    validate->add_flag("--inject-fault", vk_fault)->group("");  // test-only, hidden

    std::string bench_mode = "iteration-scaling";
    int bench_seed = 0, bench_threads = 0;
    auto* bench = app.add_subcommand("bench", "Timing benchmarks, CSV to standard output");
    bench->add_option("--mode", bench_mode)
        ->check(CLI::IsMember({"iteration-scaling", "eig-vs-m", "rank-iterations"}));
    bench->add_option("--seed", bench_seed);
    bench->add_option("--threads", bench_threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFlags;
    }

    if (train->parsed()) return cmd_train(ta);
    if (predict->parsed()) return cmd_predict(pa);
    if (evaluate->parsed()) return cmd_evaluate(ea);
    if (validate->parsed())
        return cmd_validate_kernel(vk_n, vk_degree, vk_trials,
                                   static_cast<unsigned>(vk_seed), vk_fault);
    if (bench->parsed()) return cmd_bench(bench_mode, static_cast<unsigned>(bench_seed),
                                          bench_threads);
    return kExitFlags;
}
