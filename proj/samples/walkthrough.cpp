// Query the sample fixture, derive weights from the sample comparisons and
// print the ranking plus a synthesized alternative.
//
//   dlom_walkthrough [samples-dir]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "dlom/dlom.hpp"

namespace fs = std::filesystem;

static dlom::Json load(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw dlom::Error(dlom::ErrorKind::kIo, "cannot read " + p.string());
  return dlom::Json::parse(in);
}

int main(int argc, char** argv) {
  fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("samples");
  try {
    std::vector<dlom::ModelRecord> models;
    for (const dlom::Json& j : load(dir / "fixture.json")) models.push_back(dlom::record_from_json(j));

    std::ifstream qin(dir / "medical_query.txt");
    std::string text((std::istreambuf_iterator<char>(qin)), {});
    auto q = dlom::query::parse_query(text);
    auto candidates = dlom::query::evaluate(q, models);
    std::cout << dlom::query::print_query(q) << "\n" << candidates.size() << " of "
              << models.size() << " models match\n\n";

    auto comparisons = dlom::comparisons_from_json(load(dir / "comparisons.json"));
    dlom::Elicitation e = dlom::elicit(comparisons);
    std::cout << "weights " << dlom::weights_to_fixed_text(e.weights) << "\n";
    std::cout << "log residual rms " << e.log_residual_rms << "\n\n";

    for (const dlom::RankedModel& r : dlom::rank_models(e.weights, candidates))
      std::cout << "  " << r.id << "  " << r.score << "\n";

    dlom::SynthesisResult s = dlom::synthesize(e.weights);
    std::cout << "\nbuild new: " << dlom::synthesis_to_json(s).dump() << "\n";
  } catch (const std::exception& ex) {
    std::cerr << "walkthrough: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
