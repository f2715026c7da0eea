#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "earkey/common.hpp"
#include "earkey/io/manifest.hpp"
#include "earkey/rng.hpp"

namespace earkey::train {

struct Split {
  std::map<std::string, int> held_out_session;  // per user
  std::vector<io::ManifestEntry> train;
  std::vector<io::ManifestEntry> test;
};

// Leave-one-session-out: for every user one re-wearing session goes to test,
// the rest train. Deterministic per seed.
inline Split split_leave_one_session(const std::vector<io::ManifestEntry>& entries,
                                     uint64_t seed) {
  std::map<std::string, std::set<int>> sessions;
  for (const auto& e : entries) sessions[e.user].insert(e.session);

  Split split;
  for (const auto& [user, set] : sessions) {
    if (set.size() < 2)
      throw ConfigError("split: user " + user + " has fewer than 2 sessions");
    std::vector<int> ordered(set.begin(), set.end());
    Rng rng = Rng(seed).fork("holdout-" + user);
    split.held_out_session[user] =
        ordered[rng.below(static_cast<uint64_t>(ordered.size()))];
  }
  for (const auto& e : entries) {
    if (e.session == split.held_out_session.at(e.user))
      split.test.push_back(e);
    else
      split.train.push_back(e);
  }
  return split;
}

}  // namespace earkey::train
