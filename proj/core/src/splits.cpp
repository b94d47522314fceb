#include "ccsp/splits.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "ccsp/error.hpp"

namespace ccsp::data {

TrialSet select_subject(const TrialSet& all, int subject) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all.subject(i) == subject) idx.push_back(i);
  }
  if (idx.empty()) throw_data(fmt::format("unknown subject {}", subject));
  return all.subset(idx);
}

Split split_sd(const TrialSet& subject) {
  if (subject.subject_ids().size() != 1) throw_invalid("split_sd: expects the trials of exactly one subject");
  std::vector<std::size_t> train, test;
  std::size_t blocks[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < subject.size(); ++i) {
    const int b = (subject.session(i) - 1) * 2 + static_cast<int>(subject.phase(i));
    ++blocks[b];
    (b == 3 ? test : train).push_back(i);
  }
  static constexpr const char* kNames[4] = {"S1-offline", "S1-online", "S2-offline", "S2-online"};
  for (int b = 0; b < 4; ++b) {
    if (blocks[b] == 0) throw_data(fmt::format("split_sd: subject {} has no {} block", subject.subject(0), kNames[b]));
    if (blocks[b] != blocks[0]) {
      throw_data(fmt::format("split_sd: subject {} has unequal blocks ({} {} vs {} {})", subject.subject(0), kNames[b],
                             blocks[b], kNames[0], blocks[0]));
    }
  }
  return Split{subject.subset(train), subject.subset(test)};
}

Split split_loso(const TrialSet& all, int test_subject, Phase train_phase) {
  const auto ids = all.subject_ids();
  if (ids.size() < 2) throw_data("split_loso: need at least two subjects");
  if (std::find(ids.begin(), ids.end(), test_subject) == ids.end()) {
    throw_data(fmt::format("split_loso: unknown subject {}", test_subject));
  }
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all.subject(i) == test_subject) {
      if (all.session(i) == 2 && all.phase(i) == Phase::online) test.push_back(i);
    } else if (all.phase(i) == train_phase) {
      train.push_back(i);
    }
  }
  if (test.empty()) throw_data(fmt::format("split_loso: subject {} has no S2-online block", test_subject));
  if (train.empty()) throw_data(fmt::format("split_loso: no {} training trials", to_string(train_phase)));
  return Split{all.subset(train), all.subset(test)};
}

}  // namespace ccsp::data
