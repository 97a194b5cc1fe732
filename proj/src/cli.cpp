#include "codejudge/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "codejudge/dataset.hpp"
#include "codejudge/pipeline.hpp"

namespace codejudge {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

int usage_error(const std::string& message) {
    std::cerr << "error: " << message << '\n';
    return 2;
}

std::string default_output(const std::string& output) {
    return output.empty() ? "report.json" : output;
}

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream input(path);
    if (!input) {
        throw ConfigError("cannot open config file: " + path);
    }
    json config = json::parse(input, nullptr, /*allow_exceptions=*/false);
    if (config.is_discarded() || !config.is_object()) {
        throw ConfigError("config file is not a JSON object: " + path);
    }
    return config;
}

MeanStd mean_std_from_json(const json& j) {
    return {j.value("mean", 0.0), j.value("std", 0.0)};
}

int do_evaluate(const CliOptions& opts) {
    if (opts.dataset.empty()) return usage_error("evaluate requires --dataset");
    const auto method = method_from_string(opts.method);
    if (!method.has_value()) return usage_error("unknown --method " + opts.method);
    if (opts.mock_script.empty() && opts.endpoint.empty()) {
        return usage_error("evaluate needs --endpoint URL or --mock SCRIPT_PATH");
    }

    const SeverityWeights weights = parse_weights_spec(opts.weights_spec);
    auto templates = TemplateLibrary::load_directory(opts.templates_dir);

    std::shared_ptr<Transport> transport;
    if (!opts.mock_script.empty()) {
        transport = MockTransport::from_script_file(opts.mock_script);
    } else {
        transport = std::make_shared<HttpTransport>();
    }

    ModelConfig model;
    model.model_name = opts.model;
    model.endpoint_url = opts.endpoint;
    // The key is only ever read from the environment, never from a flag.
    model.api_key_env = opts.mock_script.empty() ? opts.api_key_env : "";
    model.temperature = opts.temperature;
    model.top_p = opts.top_p;
    model.max_output_tokens = opts.max_output_tokens;

    PipelineConfig config;
    config.mode = EvaluationMode{*method, opts.with_reference};
    config.model = model;
    config.repeats = opts.repeats;
    config.concurrency_limit = opts.concurrency;
    config.weights = weights;

    const auto tasks = load_dataset(opts.dataset);
    Pipeline pipeline(std::move(templates), std::move(transport), config);
    auto output = pipeline.run(tasks);

    output.report.config["dataset"] = opts.dataset;
    if (!opts.transcripts.empty()) {
        write_transcripts(output.transcripts, opts.transcripts);
        output.report.transcripts_redirected = true;
        output.report.config["transcripts"] = opts.transcripts;
    }
    write_report(output.report, default_output(opts.output));
    std::cout << summary_table(output.report);
    return 0;
}

int do_render_prompts(const CliOptions& opts) {
    if (opts.dataset.empty()) return usage_error("render-prompts requires --dataset");
    const auto method = method_from_string(opts.method);
    if (!method.has_value()) return usage_error("unknown --method " + opts.method);

    const auto templates = TemplateLibrary::load_directory(opts.templates_dir);
    const EvaluationMode mode{*method, opts.with_reference};
    const auto tasks = load_dataset(opts.dataset);
    for (const auto& task : tasks) {
        const auto outcome = validate_task(task, mode);
        if (!outcome.ok()) {
            std::cerr << "error: task " << task.task_id << ": "
                      << outcome.violations.front().message << '\n';
            return 1;
        }
    }

    std::ofstream file;
    if (!opts.output.empty()) {
        file.open(opts.output, std::ios::binary);
        if (!file) throw IoError("cannot open output file: " + opts.output);
    }
    std::ostream& out = opts.output.empty() ? std::cout : file;

    auto emit = [&](const std::string& task_id, const std::string& candidate_id,
                    const RenderedPrompt& prompt) {
        ordered_json line;
        line["task_id"] = task_id;
        line["candidate_id"] = candidate_id;
        line["template_id"] = to_string(prompt.template_id);
        line["fingerprint"] = fingerprint_hex(prompt.text);
        line["text"] = prompt.text;
        out << line.dump() << '\n';
    };

    for (const auto& task : tasks) {
        for (const auto& candidate : task.candidates) {
            switch (*method) {
                case Method::analyze_summarize: {
                    emit(task.task_id, candidate.candidate_id,
                         templates.render_analysis(task, candidate, mode.with_reference));
                    // The summarization prompt embeds the runtime analysis
                    // text, so only a marker can be emitted here.
                    ordered_json marker;
                    marker["task_id"] = task.task_id;
                    marker["candidate_id"] = candidate.candidate_id;
                    marker["template_id"] = to_string(TemplateId::summarization);
                    marker["note"] = "rendered at runtime from the analysis text";
                    out << marker.dump() << '\n';
                    break;
                }
                case Method::fault_localization:
                    emit(task.task_id, candidate.candidate_id,
                         templates.render_fault_localization(task, candidate,
                                                             mode.with_reference));
                    break;
                case Method::vanilla_binary:
                    emit(task.task_id, candidate.candidate_id,
                         templates.render_vanilla(task, candidate, /*graded=*/false,
                                                  mode.with_reference));
                    break;
                case Method::vanilla_graded:
                    emit(task.task_id, candidate.candidate_id,
                         templates.render_vanilla(task, candidate, /*graded=*/true,
                                                  mode.with_reference));
                    break;
            }
        }
    }
    return 0;
}

int do_score_offline(const CliOptions& opts) {
    if (opts.transcripts.empty()) {
        return usage_error("score-offline requires --transcripts PATH (input)");
    }
    const SeverityWeights weights = parse_weights_spec(opts.weights_spec);
    const auto records = load_transcripts(opts.transcripts);
    auto output = score_offline(records, weights);
    output.report.config["transcripts"] = opts.transcripts;
    write_report(output.report, default_output(opts.output));
    std::cout << summary_table(output.report);
    return 0;
}

int do_stats(const CliOptions& opts) {
    if (opts.report.empty()) return usage_error("stats requires --report PATH");
    std::ifstream input(opts.report);
    if (!input) throw IoError("cannot open report file: " + opts.report);
    const json parsed = json::parse(input, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        throw IoError("report file is not valid JSON: " + opts.report);
    }

    Report report;
    report.config = parsed.value("config", json::object());
    const auto& aggregate = parsed.value("aggregate", json::object());
    report.aggregate.run_count = aggregate.value("run_count", 0);
    if (aggregate.contains("accuracy") && !aggregate["accuracy"].is_null()) {
        report.aggregate.accuracy = mean_std_from_json(aggregate["accuracy"]);
    }
    if (aggregate.contains("kendall_tau") && !aggregate["kendall_tau"].is_null()) {
        report.aggregate.kendall_tau = mean_std_from_json(aggregate["kendall_tau"]);
    }
    if (aggregate.contains("spearman_rho") && !aggregate["spearman_rho"].is_null()) {
        report.aggregate.spearman_rho = mean_std_from_json(aggregate["spearman_rho"]);
    }
    for (const auto& run : parsed.value("runs", json::array())) {
        RunStatistics stats;
        stats.excluded_count = run.value("excluded_count", 0);
        report.run_stats.push_back(stats);
    }
    std::cout << summary_table(report);
    return 0;
}

}  // namespace

SeverityWeights parse_weights_spec(const std::string& spec) {
    SeverityWeights weights;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        auto comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        const std::string part = spec.substr(pos, comma - pos);
        const auto equals = part.find('=');
        if (equals == std::string::npos) {
            throw ConfigError("weights spec entry \"" + part + "\" is not key=value");
        }
        const std::string key = part.substr(0, equals);
        std::int64_t value = 0;
        try {
            value = std::stoll(part.substr(equals + 1));
        } catch (const std::exception&) {
            throw ConfigError("weights spec value in \"" + part + "\" is not an integer");
        }
        if (key == "small") {
            weights.small = value;
        } else if (key == "major") {
            weights.major = value;
        } else if (key == "fatal") {
            weights.fatal = value;
        } else if (key == "cap") {
            weights.cap = value;
        } else {
            throw ConfigError("unknown weights key \"" + key + "\"");
        }
        pos = comma + 1;
    }
    validate_weights(weights);
    return weights;
}

CliOptions merge_options(const CliOptions& defaults, const json& config_file,
                         const CliOptions& cli_values,
                         const std::set<std::string>& cli_set) {
    CliOptions merged = defaults;

    auto from_config = [&](const char* key, auto& target) {
        using T = std::decay_t<decltype(target)>;
        if (!config_file.contains(key)) return;
        const auto& value = config_file[key];
        if constexpr (std::is_same_v<T, std::string>) {
            if (value.is_string()) target = value.template get<std::string>();
        } else if constexpr (std::is_same_v<T, bool>) {
            if (value.is_boolean()) target = value.template get<bool>();
        } else if constexpr (std::is_same_v<T, int>) {
            if (value.is_number()) target = value.template get<int>();
        } else {
            if (value.is_number()) target = value.template get<double>();
        }
    };

    from_config("dataset", merged.dataset);
    from_config("method", merged.method);
    from_config("with_reference", merged.with_reference);
    from_config("model", merged.model);
    from_config("endpoint", merged.endpoint);
    from_config("api_key_env", merged.api_key_env);
    from_config("temperature", merged.temperature);
    from_config("top_p", merged.top_p);
    from_config("max_tokens", merged.max_output_tokens);
    from_config("deterministic", merged.deterministic);
    from_config("repeats", merged.repeats);
    from_config("concurrency", merged.concurrency);
    from_config("output", merged.output);
    from_config("transcripts", merged.transcripts);
    from_config("mock", merged.mock_script);
    from_config("templates", merged.templates_dir);
    from_config("report", merged.report);
    if (config_file.contains("weights")) {
        const auto& weights = config_file["weights"];
        if (weights.is_string()) {
            merged.weights_spec = weights.get<std::string>();
        } else if (weights.is_object()) {
            std::string spec;
            for (const char* key : {"small", "major", "fatal", "cap"}) {
                if (!weights.contains(key)) continue;
                if (!spec.empty()) spec += ',';
                spec += std::string(key) + "=" +
                        std::to_string(weights[key].get<std::int64_t>());
            }
            merged.weights_spec = spec;
        }
    }

    auto overridden = [&](const char* name) { return cli_set.count(name) > 0; };

    if (overridden("deterministic")) merged.deterministic = cli_values.deterministic;
    if (merged.deterministic) {
        // The single-run consistent-output protocol.
        merged.temperature = 0.0;
        merged.top_p = 1.0;
        merged.repeats = 1;
    }

    if (overridden("dataset")) merged.dataset = cli_values.dataset;
    if (overridden("method")) merged.method = cli_values.method;
    if (overridden("with-reference")) merged.with_reference = cli_values.with_reference;
    if (overridden("model")) merged.model = cli_values.model;
    if (overridden("endpoint")) merged.endpoint = cli_values.endpoint;
    if (overridden("api-key-env")) merged.api_key_env = cli_values.api_key_env;
    if (overridden("temperature")) merged.temperature = cli_values.temperature;
    if (overridden("top-p")) merged.top_p = cli_values.top_p;
    if (overridden("max-tokens")) merged.max_output_tokens = cli_values.max_output_tokens;
    if (overridden("repeats")) merged.repeats = cli_values.repeats;
    if (overridden("concurrency")) merged.concurrency = cli_values.concurrency;
    if (overridden("weights")) merged.weights_spec = cli_values.weights_spec;
    if (overridden("output")) merged.output = cli_values.output;
    if (overridden("transcripts")) merged.transcripts = cli_values.transcripts;
    if (overridden("mock")) merged.mock_script = cli_values.mock_script;
    if (overridden("templates")) merged.templates_dir = cli_values.templates_dir;
    if (overridden("report")) merged.report = cli_values.report;
    return merged;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"CodeJudge: LLM-as-a-judge evaluation of generated code"};
    app.require_subcommand(1);

    CliOptions cli;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override it");
        sub->add_option("--templates", cli.templates_dir,
                        "directory holding the prompt template files");
        sub->add_option("--output", cli.output, "output path");
    };
    auto add_dataset_flags = [&](CLI::App* sub) {
        sub->add_option("--dataset", cli.dataset, "JSONL dataset path");
        sub->add_option("--method", cli.method,
                        "analyze-summarize | fault-localization | vanilla-binary | "
                        "vanilla-graded");
        sub->add_flag("--with-reference,!--no-reference", cli.with_reference,
                      "include the reference solution in prompts");
    };

    CLI::App* evaluate = app.add_subcommand("evaluate", "run a full evaluation");
    add_common(evaluate);
    add_dataset_flags(evaluate);
    evaluate->add_option("--model", cli.model, "model name sent on the wire");
    evaluate->add_option("--endpoint", cli.endpoint,
                         "OpenAI-compatible base URL, e.g. https://api.openai.com/v1");
    evaluate->add_option("--api-key-env", cli.api_key_env,
                         "environment variable holding the API key");
    evaluate->add_option("--temperature", cli.temperature, "sampling temperature");
    evaluate->add_option("--top-p", cli.top_p, "nucleus sampling mass");
    evaluate->add_option("--max-tokens", cli.max_output_tokens, "completion token budget");
    evaluate->add_flag("--deterministic", cli.deterministic,
                       "preset: temperature 0, top-p 1, repeats 1");
    evaluate->add_option("--repeats", cli.repeats, "independent evaluation runs");
    evaluate->add_option("--concurrency", cli.concurrency, "bounded in-flight requests");
    evaluate->add_option("--weights", cli.weights_spec, "small=I,major=I,fatal=I");
    evaluate->add_option("--transcripts", cli.transcripts,
                         "redirect raw LLM outputs to this sidecar JSONL file");
    evaluate->add_option("--mock", cli.mock_script,
                         "scripted mock backend instead of HTTP (script JSON path)");

    CLI::App* render = app.add_subcommand("render-prompts",
                                          "dump rendered prompts without calling a backend");
    add_common(render);
    add_dataset_flags(render);

    CLI::App* offline = app.add_subcommand(
        "score-offline", "re-parse and re-score stored transcripts, no backend calls");
    add_common(offline);
    offline->add_option("--transcripts", cli.transcripts, "transcripts JSONL (input)");
    offline->add_option("--weights", cli.weights_spec, "small=I,major=I,fatal=I");

    CLI::App* stats = app.add_subcommand("stats", "print the summary table of a report");
    add_common(stats);
    stats->add_option("--report", cli.report, "report JSON produced by evaluate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::set<std::string> cli_set;
    for (const auto* option : sub->get_options()) {
        if (option->count() > 0) cli_set.insert(option->get_single_name());
    }

    try {
        const json config_file = load_config_file(config_path);
        const CliOptions merged = merge_options(CliOptions{}, config_file, cli, cli_set);

        if (sub == evaluate) return do_evaluate(merged);
        if (sub == render) return do_render_prompts(merged);
        if (sub == offline) return do_score_offline(merged);
        return do_stats(merged);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace codejudge
