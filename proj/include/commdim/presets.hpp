#pragma once

// Named seed-pair presets for Reddit-scale corpora. A preset only applies
// when both community ids exist in the vocabulary; on other corpora pass an
// explicit left:right pair instead. Three catalogued axes (time, sociality,
// edginess) ship without built-in members: their seed pairs are not recorded
// here, so selecting them requires an explicit pair.

#include <string>
#include <vector>

#include "commdim/common.hpp"
#include "commdim/dimensions.hpp"

namespace commdim {

struct SeedPreset {
  std::string name;
  SeedPair pair;     // empty members when no seed pair is recorded
  std::string note;  // what the axis represents, for catalog listings

  bool has_pair() const { return !pair.left.empty() && !pair.right.empty(); }
};

inline const std::vector<SeedPreset>& seed_presets() {
  static const std::vector<SeedPreset> presets = {
      {"age", {"teenagers", "RedditForGrownups"}, "young vs grown-up"},
      {"gender", {"AskMen", "AskWomen"}, "masculine vs feminine"},
      {"partisan", {"democrats", "Conservative"}, "left-wing vs right-wing"},
      {"age-b", {"AskMen", "AskMenOver30"}, "alternate age seed"},
      {"gender-b", {"daddit", "Mommit"}, "alternate gender seed"},
      {"partisan-b", {"hillaryclinton", "The_Donald"}, "alternate partisan seed"},
      {"affluence", {"vagabond", "backpacking"}, "poorer vs richer"},
      {"time", {"", ""}, "platform era; no recorded seed pair"},
      {"sociality", {"", ""}, "discussion- vs meetup-focused; no recorded seed pair"},
      {"edginess", {"", ""}, "provocation and antagonism; no recorded seed pair"},
  };
  return presets;
}

inline const SeedPreset* find_seed_preset(std::string_view name) {
  for (const auto& p : seed_presets())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace commdim
