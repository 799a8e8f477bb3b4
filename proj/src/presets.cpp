#include <array>

#include "sufaudit/errors.hpp"
#include "sufaudit/scm.hpp"

namespace sufaudit {

namespace {

struct Preset {
  const char* name;
  const char* description;
  const char* text;
};

// Coefficients are on the logit scale. Recurring constants:
//   0.4054651081081644 = logit(0.6), -1.791759469228055 = logit(0.2) - logit(0.6)
//   -0.4054651081081644 = logit(0.4), 1.252762968495368 = logit(0.7) - logit(0.4)
//   0.6190392084062235 = logit(0.65)
constexpr std::array<Preset, 9> kPresets{{
    {"fig1a", "selection driven by the macro indicator only: P(IMF=1) is 0.6 under poor and 0.2 under good macro",
     R"(WoM_pre -> IMF
WoI_pre
node WoM_pre: logistic(0)
node WoI_pre: logistic(0)
node IMF: logistic(0.4054651081081644; WoM_pre=-1.791759469228055)
)"},
    {"fig1b", "individual wellbeing drives the macro indicator, which drives selection",
     R"(WoI_pre -> WoM_pre -> IMF
node WoI_pre: logistic(0)
node WoM_pre: logistic(-0.5; WoI_pre=1)
node IMF: logistic(0.4054651081081644; WoM_pre=-1.791759469228055)
)"},
    {"fig1b_woi", "fig1b plus a direct arrow from individual wellbeing to selection (weight 1.0)",
     R"(WoI_pre -> WoM_pre -> IMF
WoI_pre -> IMF
node WoI_pre: logistic(0)
node WoM_pre: logistic(-0.5; WoI_pre=1)
node IMF: logistic(0.4054651081081644; WoM_pre=-1.791759469228055, WoI_pre=1)
)"},
    {"fig1c",
     "selection on macro; the programme raises P(WoM_post=1) from 0.4 to 0.7 and P(WoI_post=1) from 0.5 to 0.65",
     R"(WoM_pre -> IMF
IMF -> WoM_post
IMF -> WoI_post
node WoM_pre: logistic(0)
node IMF: logistic(0.4054651081081644; WoM_pre=-1.791759469228055)
node WoM_post: logistic(-0.4054651081081644; IMF=1.252762968495368)
node WoI_post: logistic(0; IMF=0.6190392084062235)
)"},
    {"fig1d", "two periods: past wellness levels also drive future levels",
     R"(WoI_pre -> WoM_pre -> IMF
IMF -> WoM_post
IMF -> WoI_post
WoM_pre -> WoM_post
WoI_pre -> WoI_post
node WoI_pre: logistic(0)
node WoM_pre: logistic(-0.5; WoI_pre=1)
node IMF: logistic(0.4054651081081644; WoM_pre=-1.791759469228055)
node WoM_post: logistic(-1; IMF=1.25, WoM_pre=1.5)
node WoI_post: logistic(-0.5; IMF=0.6, WoI_pre=1.2)
)"},
    {"fig2a", "observed confounder C1 of macro performance and selection",
     R"(C1 -> WoM_pre -> IMF
C1 -> IMF
IMF -> WoM_post
IMF -> WoI_post
node C1: logistic(0)
node WoM_pre: logistic(-1; C1=2)
node IMF: logistic(0.4054651081081644; WoM_pre=-1.791759469228055, C1=1.5)
node WoM_post: logistic(-0.4054651081081644; IMF=1.252762968495368)
node WoI_post: logistic(0; IMF=0.6190392084062235)
)"},
    {"fig2b", "observed confounders C3 (selection and macro outcome) and C4 (selection and wellbeing outcome)",
     R"(WoM_pre -> IMF
C3 -> IMF
C4 -> IMF
IMF -> WoM_post
IMF -> WoI_post
C3 -> WoM_post
C4 -> WoI_post
node WoM_pre: logistic(0)
node C3: logistic(0)
node C4: logistic(0)
node IMF: logistic(-0.5; WoM_pre=-1.5, C3=1.2, C4=-1.2)
node WoM_post: logistic(-1; IMF=1.25, C3=1.5)
node WoI_post: logistic(-0.5; IMF=0.6, C4=1.5)
)"},
    {"fig2c", "fig1c with a latent confounder C of selection and wellbeing, and an instrument Z of selection",
     R"(WoM_pre -> IMF
Z -> IMF
C -> IMF
C -> WoI_post
IMF -> WoM_post
IMF -> WoI_post
latent C
node WoM_pre: logistic(0)
node Z: logistic(0)
node C: logistic(0)
node IMF: logistic(-1.5; WoM_pre=-0.5, Z=2.5, C=1.5)
node WoM_post: logistic(-0.4054651081081644; IMF=1.252762968495368)
node WoI_post: logistic(-0.6; IMF=0.6, C=1.2)
)"},
    {"hetero",
     "adverse subgroup: the programme raises P(WoI_post=1) by 0.2 when X=0 and lowers it by 0.2 when X=1 "
     "(P(X=1)=0.25, population effect +0.1)",
     R"(X -> IMF
WoM_pre -> IMF
X -> WoI_post
IMF -> WoI_post
IMF -> WoM_post
node X: logistic(-1.0986122886681098)
node WoM_pre: logistic(0)
node IMF: logistic(0.2; WoM_pre=-1, X=0.8)
node WoI_post: logistic(0; IMF=0.8472978603872037, X=0.4054651081081644, IMF*X=-1.6582280766035324)
node WoM_post: logistic(-0.4054651081081644; IMF=1.252762968495368)
)"},
}};

const Preset& find_preset(const std::string& name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return p;
  }
  throw ModelError("unknown preset '" + name + "'");
}

}  // namespace

StructuralModel build_scenario(const std::string& name, const std::map<std::string, double>& overrides) {
  const Preset& p = find_preset(name);
  StructuralModel model = parse_model(p.text, p.name);
  return overrides.empty() ? model : model.with_overrides(overrides);
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

std::string scenario_description(const std::string& name) { return find_preset(name).description; }

}  // namespace sufaudit
