#include "gctr/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "gctr/config.hpp"
#include "gctr/digest.hpp"
#include "gctr/effort.hpp"
#include "gctr/equilibrium.hpp"
#include "gctr/extraction.hpp"
#include "gctr/loop.hpp"

namespace gctr {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& text, const std::string& path,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DomainError("cannot write file '" + path + "'");
  file << text;
}

EffortWeights parse_weights(const std::string& spec) {
  EffortWeights weights;
  if (spec.empty()) return weights;
  double values[3];
  char extra;
  if (std::sscanf(spec.c_str(), "%lf,%lf,%lf%c", &values[0], &values[1],
                  &values[2], &extra) != 3) {
    throw DomainError("weights must be 'msg,tok,cost', got '" + spec + "'");
  }
  weights.msg = values[0];
  weights.tok = values[1];
  weights.cost = values[2];
  weights.validate();
  return weights;
}

struct CommonOptions {
  std::string config_path;
  std::string weights_spec;
  double lambda = 0.0;  // 0 = keep config default
  long long seed = 0;
};

CliConfig effective_config(const CommonOptions& options) {
  CliConfig config = CliConfig::load(
      options.config_path.empty()
          ? std::nullopt
          : std::optional<std::string>(options.config_path));
  if (!options.weights_spec.empty()) {
    config.weights = parse_weights(options.weights_spec);
  }
  if (options.lambda > 0.0) config.solver.lambda_attacker = options.lambda;
  if (options.seed != 0) config.seed = options.seed;
  return config;
}

NormalizedGraph load_scored(const std::string& graph_path,
                            const std::string& log_path,
                            const CliConfig& config, std::ostream& err) {
  AttackGraph graph = parse_graph_document(read_file(graph_path));
  NormalizedGraph normalized = normalize(graph);
  if (!log_path.empty()) {
    SessionLog log = parse_session_log(read_file(log_path));
    normalized = score_edges(normalized, log, config.weights);
  } else {
    bool unscored = false;
    for (const auto& [key, score] : normalized.graph.edges()) {
      if (!score && !normalized.graph.node(key.second).artificial) {
        unscored = true;
      }
    }
    if (unscored) {
      err << "note: no session log given; unscored edges default to 0.5\n";
    }
    normalized = fill_missing_scores(normalized);
  }
  for (const std::string& warning : normalized.warnings) {
    err << "warning: " << warning << "\n";
  }
  return normalized;
}

std::unique_ptr<InferenceClient> make_inference(const CliConfig& config) {
  if (config.endpoint.url.empty()) {
    return std::make_unique<NullInferenceClient>();
  }
  return std::make_unique<HttpInferenceClient>(config.endpoint);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Game-theoretic guidance engine for attack graphs"};
  app.require_subcommand(1);

  CommonOptions common;
  app.add_option("--config", common.config_path, "Config file (JSON)");
  app.add_option("--seed", common.seed, "Deterministic seed (recorded)");

  // validate
  std::string validate_graph_path;
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "Check a graph document");
  cmd_validate->add_option("graph", validate_graph_path, "Graph document")
      ->required();

  // normalize
  std::string normalize_graph_path, normalize_out;
  CLI::App* cmd_normalize =
      app.add_subcommand("normalize", "Run the preprocessing pipeline");
  cmd_normalize->add_option("graph", normalize_graph_path, "Graph document")
      ->required();
  cmd_normalize->add_option("-o,--output", normalize_out, "Output path");

  // score
  std::string score_graph_path, score_log_path, score_out;
  CLI::App* cmd_score =
      app.add_subcommand("score", "Assign effort scores from a session log");
  cmd_score->add_option("graph", score_graph_path, "Graph document")
      ->required();
  cmd_score->add_option("--log", score_log_path, "Session log (JSONL)")
      ->required();
  cmd_score->add_option("--weights", common.weights_spec,
                        "Effort weights msg,tok,cost");
  cmd_score->add_option("-o,--output", score_out, "Output path");

  // solve
  std::string solve_graph_path, solve_log_path;
  bool solve_verify = false;
  CLI::App* cmd_solve =
      app.add_subcommand("solve", "Compute the equilibrium tables");
  cmd_solve->add_option("graph", solve_graph_path, "Graph document")
      ->required();
  cmd_solve->add_option("--log", solve_log_path, "Session log (JSONL)");
  cmd_solve->add_option("--lambda", common.lambda, "Attacker rate");
  cmd_solve->add_option("--weights", common.weights_spec,
                        "Effort weights msg,tok,cost");
  cmd_solve->add_flag("--verify", solve_verify,
                      "Re-check the solution against the payoff matrix");

  // digest
  std::string digest_graph_path, digest_log_path;
  std::string digest_mode = "algorithmic";
  std::string digest_role = "merged";
  double bottleneck_threshold = 0.95;
  double high_risk_threshold = 0.90;
  CLI::App* cmd_digest =
      app.add_subcommand("digest", "Render strategic guidance");
  cmd_digest->add_option("graph", digest_graph_path, "Graph document")
      ->required();
  cmd_digest->add_option("--log", digest_log_path, "Session log (JSONL)");
  cmd_digest->add_option("--mode", digest_mode, "algorithmic or llm");
  cmd_digest->add_option("--role", digest_role,
                         "attacker, defender or merged");
  cmd_digest->add_option("--lambda", common.lambda, "Attacker rate");
  cmd_digest->add_option("--weights", common.weights_spec,
                         "Effort weights msg,tok,cost");
  CLI::Option* opt_bottleneck =
      cmd_digest->add_option("--bottleneck-threshold", bottleneck_threshold,
                             "Bottleneck score threshold");
  CLI::Option* opt_high_risk =
      cmd_digest->add_option("--high-risk-threshold", high_risk_threshold,
                             "High-risk score threshold");

  // extract
  std::string extract_log_path, extract_driver = "stub", extract_out;
  int extract_cap_override = 0;
  CLI::App* cmd_extract =
      app.add_subcommand("extract", "Build a graph from a session log");
  cmd_extract->add_option("--log", extract_log_path, "Session log (JSONL)")
      ->required();
  cmd_extract->add_option("--driver", extract_driver,
                          "stub (offline) or http (endpoint)");
  cmd_extract->add_option("--cap-max", extract_cap_override,
                          "Override the adaptive node cap");
  cmd_extract->add_option("-o,--output", extract_out, "Output path");

  // loop
  std::string loop_driver, loop_graph_path, loop_log_path, loop_out;
  std::string loop_mode = "algorithmic", loop_role = "merged";
  int loop_trigger = 5, loop_max = 25;
  long long loop_analysis_budget = 0, loop_execution_budget = 0;
  CLI::App* cmd_loop =
      app.add_subcommand("loop", "Run the closed feedback loop");
  cmd_loop
      ->add_option("--driver", loop_driver,
                   "Action driver, e.g. scripted:<file>")
      ->required();
  cmd_loop->add_option("--graph", loop_graph_path, "Initial graph document");
  cmd_loop->add_option("--log", loop_log_path, "Session log for scoring");
  cmd_loop->add_option("--trigger-every", loop_trigger, "Analysis cadence");
  cmd_loop->add_option("--max-interactions", loop_max, "Interaction budget");
  cmd_loop->add_option("--mode", loop_mode, "Digest mode");
  cmd_loop->add_option("--role", loop_role, "Digest role");
  cmd_loop->add_option("--lambda", common.lambda, "Attacker rate");
  cmd_loop->add_option("--analysis-budget-ms", loop_analysis_budget,
                       "Per-trigger analysis budget");
  cmd_loop->add_option("--execution-budget-ms", loop_execution_budget,
                       "Per-interaction execution budget");
  cmd_loop->add_option("-o,--output", loop_out, "Record output path");

  // render
  std::string render_graph_path, render_log_path;
  bool render_solve = false;
  CLI::App* cmd_render = app.add_subcommand("render", "Emit DOT");
  cmd_render->add_option("graph", render_graph_path, "Graph document")
      ->required();
  cmd_render->add_flag("--solve", render_solve,
                       "Annotate with equilibrium probabilities");
  cmd_render->add_option("--log", render_log_path, "Session log (JSONL)");
  cmd_render->add_option("--lambda", common.lambda, "Attacker rate");

  std::vector<const char*> argv;
  argv.push_back("gctr");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    CliConfig config = effective_config(common);
    if (opt_bottleneck->count() > 0) {
      config.thresholds.bottleneck = bottleneck_threshold;
    }
    if (opt_high_risk->count() > 0) {
      config.thresholds.high_risk = high_risk_threshold;
    }

    if (cmd_validate->parsed()) {
      AttackGraph graph = parse_graph_document(read_file(validate_graph_path));
      ValidationReport report = validate_graph(graph);
      for (const Finding& finding : report.errors) {
        out << "error [" << finding.code << "] " << finding.message << "\n";
      }
      for (const Finding& finding : report.warnings) {
        out << "warning [" << finding.code << "] " << finding.message << "\n";
      }
      if (report.ok()) {
        out << "ok: " << graph.node_count() << " nodes, " << graph.edge_count()
            << " edges\n";
        return 0;
      }
      return 1;
    }

    if (cmd_normalize->parsed()) {
      AttackGraph graph =
          parse_graph_document(read_file(normalize_graph_path));
      NormalizedGraph normalized = normalize(graph);
      for (const std::string& warning : normalized.warnings) {
        err << "warning: " << warning << "\n";
      }
      write_output(serialize_graph_document(normalized.graph), normalize_out,
                   out);
      return 0;
    }

    if (cmd_score->parsed()) {
      AttackGraph graph = parse_graph_document(read_file(score_graph_path));
      NormalizedGraph normalized = normalize(graph);
      SessionLog log = parse_session_log(read_file(score_log_path));
      NormalizedGraph scored = score_edges(normalized, log, config.weights);
      for (const std::string& warning : scored.warnings) {
        err << "warning: " << warning << "\n";
      }
      write_output(serialize_graph_document(scored.graph), score_out, out);
      return 0;
    }

    if (cmd_solve->parsed()) {
      NormalizedGraph scored =
          load_scored(solve_graph_path, solve_log_path, config, err);
      EquilibriumSolution solution = solve_equilibrium(scored, config.solver);
      out << format_solution_tables(solution, scored);
      if (solve_verify) {
        PayoffMatrix matrix = build_payoff_matrix(
            scored, enumerate_attack_paths(scored, config.solver.path_ceiling),
            config.solver);
        VerificationReport report =
            verify_equilibrium(matrix, solution, 1e-7);
        out << "\nVerification: " << (report.pass ? "pass" : "FAIL")
            << " (worst deviation " << report.worst_deviation << ")\n";
        if (!report.pass) return 1;
      }
      return 0;
    }

    if (cmd_digest->parsed()) {
      NormalizedGraph scored =
          load_scored(digest_graph_path, digest_log_path, config, err);
      EquilibriumSolution solution = solve_equilibrium(scored, config.solver);
      DigestMode mode = parse_digest_mode(digest_mode);
      DigestRole role = parse_digest_role(digest_role);
      std::unique_ptr<InferenceClient> inference = make_inference(config);
      DigestOptions options;
      options.thresholds = config.thresholds;
      options.timeout = config.endpoint.timeout;
      options.model_hint = config.endpoint.model;
      Digest digest = generate_digest(scored, solution, mode, role,
                                      inference.get(), options);
      if (digest.fallback_used) {
        err << "note: llm inference unavailable; algorithmic fallback used\n";
      }
      out << digest.text;
      return 0;
    }

    if (cmd_extract->parsed()) {
      SessionLog log = parse_session_log(read_file(extract_log_path));
      ExtractionConfig extraction = config.extraction;
      extraction.cap = node_cap(log.message_count());
      if (extract_cap_override > 0) {
        extraction.cap.max_nodes = extract_cap_override;
      }
      std::unique_ptr<InferenceClient> client;
      if (extract_driver == "stub") {
        client = std::make_unique<RuleBasedExtractor>(log);
      } else if (extract_driver == "http") {
        if (config.endpoint.url.empty()) {
          throw DomainError("http driver needs GCTR_INFERENCE_URL");
        }
        client = std::make_unique<HttpInferenceClient>(config.endpoint);
      } else {
        throw DomainError("unknown extraction driver '" + extract_driver +
                          "'");
      }
      AttackGraph graph = extract_graph(log, *client, extraction);
      write_output(serialize_graph_document(graph), extract_out, out);
      return 0;
    }

    if (cmd_loop->parsed()) {
      const std::string prefix = "scripted:";
      if (loop_driver.rfind(prefix, 0) != 0) {
        throw DomainError("unknown loop driver '" + loop_driver +
                          "' (expected scripted:<file>)");
      }
      ScriptedDriver driver =
          ScriptedDriver::from_file(loop_driver.substr(prefix.size()));
      AttackGraph initial;
      if (!loop_graph_path.empty()) {
        initial = parse_graph_document(read_file(loop_graph_path));
      } else {
        AttackNode seed_node;
        seed_node.id = 1;
        seed_node.name = "Exercise Start";
        seed_node.message_id = 1;
        initial.add_node(seed_node);
      }
      LoopConfig loop_config = config.loop;
      loop_config.trigger_every = loop_trigger;
      loop_config.max_interactions = loop_max;
      loop_config.digest_mode = parse_digest_mode(loop_mode);
      loop_config.role = parse_digest_role(loop_role);
      if (loop_analysis_budget > 0) {
        loop_config.analysis_budget =
            std::chrono::milliseconds(loop_analysis_budget);
      }
      if (loop_execution_budget > 0) {
        loop_config.execution_budget =
            std::chrono::milliseconds(loop_execution_budget);
      }
      LoopDependencies deps;
      deps.solver = config.solver;
      deps.weights = config.weights;
      deps.thresholds = config.thresholds;
      std::unique_ptr<InferenceClient> inference = make_inference(config);
      deps.inference = inference.get();
      if (!loop_log_path.empty()) {
        deps.log = parse_session_log(read_file(loop_log_path));
      }
      RunRecord record = run_loop(driver, driver, std::move(initial),
                                  loop_config, deps);
      write_output(record.to_jsonl(), loop_out, out);
      if (record.terminal_reason == "driver_error") {
        err << "driver error: " << record.terminal_detail << "\n";
        return 1;
      }
      return 0;
    }

    if (cmd_render->parsed()) {
      AttackGraph graph = parse_graph_document(read_file(render_graph_path));
      if (render_solve) {
        NormalizedGraph scored =
            load_scored(render_graph_path, render_log_path, config, err);
        EquilibriumSolution solution =
            solve_equilibrium(scored, config.solver);
        out << render_dot(scored.graph, &solution);
      } else {
        out << render_dot(graph);
      }
      return 0;
    }

    err << "no subcommand selected\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gctr
