#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ergolab/csv.hpp"
#include "ergolab/oracle.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/scenario.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config '" << config_path << "'\n";
        return 1;
    }
    std::ostringstream text;
    text << in.rdbuf();
    const ergolab::Report report = ergolab::run_scenario(text.str());
    std::cout << report.text();
    return report.exit_code;
}

int cmd_list() {
    std::cout << ergolab::list_components(ergolab::default_registry());
    return 0;
}

int cmd_oracle_check(const std::string& csv_path) {
    const ergolab::FiniteChain chain = ergolab::load_finite_chain_csv(csv_path);
    const ergolab::DiscreteMeasure<int> pi = ergolab::stationary_distribution(chain);
    const std::size_t k = static_cast<std::size_t>(chain.size());
    std::vector<double> w(k, 0.0);
    for (std::size_t i = 0; i < pi.atoms().size(); ++i) {
        w[static_cast<std::size_t>(pi.atoms()[i])] = pi.weights()[i];
    }
    std::cout << "states: " << chain.size() << "\n";
    double residual = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double mass_in = 0.0;
        for (std::size_t i = 0; i < k; ++i) mass_in += w[i] * chain.P[i][j];
        residual = std::max(residual, std::abs(mass_in - w[j]));
        const std::string label =
            chain.labels.empty() ? std::to_string(j) : chain.labels[j];
        std::cout << "pi[" << label << "] = " << ergolab::format_double(w[j]) << "\n";
    }
    std::cout << "residual: " << ergolab::format_double(residual) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("ERGOLAB_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 0) {
            std::cerr << "error: ERGOLAB_WORKERS must be a nonnegative integer\n";
            return 1;
        }
        ergolab::set_worker_count(static_cast<int>(n));
    }

    CLI::App app{"ergolab: convergence experiments for Markov kernels"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run a scenario config and judge its bounds");
    run->add_option("config", config_path, "path to a scenario JSON file")->required();

    app.add_subcommand("list", "list available kernels, estimators, and test functions");

    std::string chain_path;
    CLI::App* oracle =
        app.add_subcommand("oracle-check", "load a finite chain and print its stationary law");
    oracle->add_option("chain", chain_path, "path to a chain CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (oracle->parsed()) return cmd_oracle_check(chain_path);
        return cmd_list();
    } catch (const ergolab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
