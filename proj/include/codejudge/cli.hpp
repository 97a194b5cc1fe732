// Command-line surface: flag parsing, config-file merging, and the four
// subcommands (evaluate, render-prompts, score-offline, stats).

#pragma once

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "codejudge/score.hpp"

namespace codejudge {

struct CliOptions {
    std::string dataset;
    std::string method = "analyze-summarize";
    bool with_reference = false;
    std::string model = "gpt-3.5-turbo";
    std::string endpoint;
    std::string api_key_env = "OPENAI_API_KEY";
    double temperature = 0.4;
    double top_p = 0.9;
    int max_output_tokens = 1024;
    bool deterministic = false;
    int repeats = 3;
    int concurrency = 4;
    std::string weights_spec = "small=5,major=50,fatal=100";
    std::string output;
    std::string transcripts;
    std::string mock_script;
    std::string templates_dir = "templates";
    std::string report;  // input for the stats subcommand
};

// "small=I,major=I,fatal=I" (any subset; unnamed keys rejected). Throws
// on malformed specs.
SeverityWeights parse_weights_spec(const std::string& spec);

// Precedence: built-in defaults < config file < --deterministic preset <
// explicitly passed flags. cli_set holds the long names the user passed.
CliOptions merge_options(const CliOptions& defaults, const nlohmann::json& config_file,
                         const CliOptions& cli_values,
                         const std::set<std::string>& cli_set);

// Full entry point; returns the process exit status (0 success, 1 fatal
// dataset/config error, 2 usage error).
int run_cli(int argc, const char* const* argv);

}  // namespace codejudge
