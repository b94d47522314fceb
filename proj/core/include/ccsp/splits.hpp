#pragma once

#include "ccsp/trial_set.hpp"

namespace ccsp::data {

struct Split {
  TrialSet train;
  TrialSet test;
};

// One subject: train on S1-offline + S1-online + S2-offline, test on
// S2-online. All four blocks must be present and equally sized.
Split split_sd(const TrialSet& subject);

// Train on the `train_phase` trials of both sessions of every other subject;
// test on the test subject's S2-online block.
Split split_loso(const TrialSet& all, int test_subject, Phase train_phase);

TrialSet select_subject(const TrialSet& all, int subject);

}  // namespace ccsp::data
