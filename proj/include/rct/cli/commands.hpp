#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace rct::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitBlowUp = 2, kExitInfeasible = 3 };

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

int cmd_simulate(const std::string& config_path, const std::string& out_dir, Streams io);

/// Exactly one of config_path / preset is set.
int cmd_sweep(const std::optional<std::string>& config_path, const std::optional<std::string>& preset,
              const std::string& out_dir, Streams io);

struct CertifyArgs {
    std::optional<double> paper_rule_s;
    std::optional<std::string> params;  ///< "m1,m2,M,n1,n2,N,s"
    double x_max = 200.0;
    std::optional<std::string> out_file;
};

int cmd_certify(const CertifyArgs& args, Streams io);

struct VerifyArgs {
    std::string suite;
    std::uint64_t seed = 42;
    std::optional<std::size_t> count;
    std::optional<std::string> replay;
    std::optional<std::string> out_file;
};

int cmd_verify(const VerifyArgs& args, Streams io);

struct RieszArgs {
    std::string density_path;
    std::string at;
    std::string which = "matrix";
    std::optional<std::string> out_file;
};

int cmd_riesz(const RieszArgs& args, Streams io);

/// Full command line entry point.
int run(int argc, char** argv, Streams io);

}  // namespace rct::cli
