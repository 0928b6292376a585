// One annotation task from queue to exported gold row, in memory.
#include <iostream>

#include "kidlex/kidlex.hpp"

using namespace kidlex;

int main() {
  const auto lex = Lexicon::from_entries(
      {{"the", 3.0, {}, {}, {}}, {"enormous", 7.8, {}, {}, {}}, {"big", 3.0, {}, {}, {}}, {"colossal", 10.5, {}, {}, {}}});
  AnnotationStore store(lex);
  const auto spans = locate_word("The enormous dog barked.", "enormous", 7.8);
  const auto ids = store.enqueue({{"story-7", *spans}}, 1);

  auto [task, check] = store.propose(ids[0], "ann", "colossal");
  std::cout << "colossal valid? " << std::boolalpha << check.valid << ", status " << to_string(task.status) << "\n";
  std::tie(task, check) = store.propose(ids[0], "ann", "big");
  std::cout << "big valid? " << check.valid << ", status " << to_string(task.status) << "\n";
  store.review(ids[0], "rev1", true, "keeps the meaning");
  task = store.review(ids[0], "rev2", true, "");
  std::cout << "after two accepts: " << to_string(task.status) << "\n\n" << store.export_cds();

  const auto gold = parse_dataset(store.export_cds(), DatasetFormat::cds);
  const auto r = score(gold, gold_as_predictions(gold), lex);
  std::cout << "\ngold-as-predictions validity " << util::fixed(r.validity, 3) << "\n";
}
