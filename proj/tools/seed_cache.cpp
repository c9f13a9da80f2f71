// Builds a replay cache from a script of canned completions.
//
//   gradekit_seed_cache --corpus DIR --templates DIR --script completions.json --cache-dir DIR
//
// Rubric-generation completions are stored first and turned into
// ai_rubrics.json through `gradekit genrubric --backend replay --force`, so
// the condition 3 prompts can then be rendered and their completions stored.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "cli/cli.hpp"
#include "gradekit/corpus/corpus.hpp"
#include "gradekit/grader/grader.hpp"
#include "gradekit/prompting/prompting.hpp"

namespace {

using gradekit::corpus::Corpus;
namespace grader = gradekit::grader;
namespace prompting = gradekit::prompting;

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return nlohmann::json::parse(f);
}

grader::RawResponse response(const prompting::PromptArtifact& a, const std::string& text,
                             const grader::BackendConfig& cfg, const std::string& stamp) {
  return {a.content_hash, text, stamp, cfg.model_id, cfg.temperature};
}

}  // namespace

int main(int argc, char** argv) {
  std::string corpus_dir;
  std::string templates_dir = "templates";
  std::string script_path;
  std::string cache_dir;
  std::string model = "gpt-4";
  double temperature = 0.0;
  std::string stamp = "2024-05-01T12:00:00Z";

  CLI::App app{"Seed a replay cache from scripted completions", "gradekit_seed_cache"};
  app.add_option("--corpus", corpus_dir, "Corpus bundle directory")->required();
  app.add_option("--templates", templates_dir, "Prompt template directory")->capture_default_str();
  app.add_option("--script", script_path, "Scripted completions")->required();
  app.add_option("--cache-dir", cache_dir, "Cache directory to fill")->required();
  app.add_option("--model", model, "Model identifier")->capture_default_str();
  app.add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
  app.add_option("--timestamp", stamp, "retrieved_at of every record")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const nlohmann::json script = read_json(script_path);
    const prompting::TemplateSet templates = prompting::load_template_set(templates_dir);
    grader::BackendConfig cfg;
    cfg.model_id = model;
    cfg.temperature = temperature;
    cfg.cache_dir = cache_dir;

    std::size_t written = 0;
    {
      grader::ResponseCache cache(cache_dir);
      const Corpus c = gradekit::corpus::load_corpus(corpus_dir);
      for (const auto& entry : script.at("rubric_generation")) {
        const std::string course_id = entry.at("course_id").get<std::string>();
        const auto questions = c.questions_of(course_id);
        std::vector<const gradekit::corpus::ModelAnswer*> answers;
        for (const auto* q : questions) answers.push_back(&c.model_answer(q->id));
        const auto artifact =
            prompting::build_rubric_prompt(c.course(course_id), questions, answers, templates.rubric_generation, cfg.key());
        written += cache.put(response(artifact, entry.at("completion").get<std::string>(), cfg, stamp));
      }
    }

    std::ostringstream out;
    std::ostringstream err;
    const int rc = gradekit::cli::run({"genrubric", "--corpus", corpus_dir, "--templates", templates_dir, "--backend",
                                       "replay", "--cache-dir", cache_dir, "--model", model, "--temperature",
                                       std::to_string(temperature), "--force"},
                                      out, err);
    std::cout << out.str();
    if (rc != 0) {
      std::cerr << err.str();
      return rc;
    }

    grader::ResponseCache cache(cache_dir);
    const Corpus c = gradekit::corpus::load_corpus(corpus_dir);
    for (const auto& entry : script.at("grading")) {
      const auto& s = c.submission(entry.at("submission_id").get<std::string>());
      const auto& q = c.question(s.question_id);
      const auto cond = prompting::parse_condition(std::to_string(entry.at("condition").get<int>()));
      if (!cond) throw std::runtime_error("bad condition in script");
      const auto artifact = grader::grading_prompt(s, q, *cond, c, templates, cfg.key());
      written += cache.put(response(artifact, entry.at("completion").get<std::string>(), cfg, stamp));
    }
    std::cout << "wrote " << written << " cache records, " << cache.size() << " total\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
