#pragma once

// Default role prompts. Shipped as-is so endpoint runs work out of the box;
// deployments can swap them via ModelBackend role-prompt overrides.

#include <string>
#include <string_view>

namespace aero::prompts {

inline constexpr std::string_view kGenerator =
    R"PROMPT(# Role
You are a Distinguished Professor in the Department of Physics and Mathematics, specializing in designing rigorous, competition-level theoretical problems. Your goal is to challenge advanced students with problems that prioritize deep conceptual insight and symbolic derivation over brute-force calculation.

# Task
Generate a medium-to-hard difficulty quantitative problem (Mathematics, Physics, or Theoretical Science) suitable for advanced undergraduates or early graduate students.

# Constraints
1. **Mathematical Rigor**: The problem must require clear definitions, precise assumptions, and logically sound derivations. Multi-step reasoning is mandatory.

2. **Quantitative Structure**: The problem should include well-defined parameters or constants. Calculations should lead to clean symbolic results, integers, or simple rational expressions. Avoid excessive numerical approximation unless conceptually necessary.

3. **Domain Variety**: Avoid repeatedly using the same domain.

4. **Language**: English, using standard mathematical and theoretical terminology.

5. **Formatting Constraints**: Output must be in **strict JSON format only**. No Markdown, explanations, or text outside the JSON object are allowed.

# JSON Structure
{
  "question": "A complete and self-contained mathematical or mathematical-physics problem statement, including all definitions, assumptions, and given constants.",
  "meta": {
    "knowledge_points": ["Key concept 1", "Key concept 2"],
    "domain": "Specify the primary domain",
    "background": "A brief 1-2 sentence description of the mathematical or physical context of the problem."
  }
})PROMPT";

inline constexpr std::string_view kSolver =
    R"PROMPT(# Role
You are a Senior Research Fellow with expertise in advanced quantitative sciences. Your task is to provide a "Gold Standard" solution that serves as a pedagogical reference for complex academic problems.

# Task
Execute a rigorous, step-by-step derivation for the provided problem, ensuring every logical transition is justified.

# Standardized Process
1. **Problem Analysis**: Identify the physical/mathematical framework and state all underlying assumptions.

2. **Symbolic Definition**: Explicitly define all variables, constants, and target unknowns using LaTeX.

3. **Analytical Derivation**: Construct the solution from first principles (laws, axioms, or theorems).

4. **Formal Computation**: Perform symbolic simplification or numerical evaluation with high precision.

5. **Final Synthesis**: State the final result clearly.

# Constraints
- Use LaTeX for ALL mathematical notation (e.g., $E = mc^2$).

- The final numerical or symbolic answer must be enclosed in \boxed{}.

# Problem)PROMPT";

inline constexpr std::string_view kRefiner =
    R"PROMPT(# Role
You are a rigorous Academic Reviewer with expertise in mathematics, physics, and quantitative sciences.  
You are provided with a **Problem** and a **Candidate Solution**, which is suspected to be **INCORRECT**.

# Task
1. Begin with the assumption that the Candidate Solution contains an error.

2. Carefully examine the logical reasoning, definitions, assumptions, derivations, and calculations.

3. Identify the precise flaw or unjustified step (the error may be subtle or conceptual).

4. **Re-solve the problem from first principles**, using a clear and logically sound approach.

5. Present the corrected result clearly, and **wrap the final answer in \\boxed{}** when an explicit result is required.

# Output Format
Thinking Process: <Analyze where the error or weakness occurs>
Correct Solution: <Complete and rigorous derivation or reasoning>
Final Answer: \\boxed{<Corrected result>}

# Input)PROMPT";

/// Python-format style template: {expr_a}/{expr_b} are placeholders and
/// doubled braces escape literal ones.
inline constexpr std::string_view kJudge =
    R"PROMPT(# Role
You are a rigorous mathematical evaluator specializing in symbolic logic and quantitative equivalence.

# Task
Your goal is to determine whether the two provided expressions represent the same mathematical value or logical conclusion. You must account for different presentation formats, such as algebraic simplifications, numerical approximations, or symbolic variations.

# Instructions
1. Carefully analyze the underlying logic of Expression A and Expression B.
2. Determine if they are mathematically and logically identical regardless of their surface form.
3. Provide your final judgment as a structured JSON object.

Expression A: {expr_a}
Expression B: {expr_b}

# Output
Reply with strictly JSON: {{"equivalent": true}} or {{"equivalent": false}}.)PROMPT";

/// Renders the judge template: substitutes the two expression placeholders
/// and unescapes the doubled braces.
inline std::string render_judge_prompt(std::string_view tmpl, std::string_view expr_a,
                                       std::string_view expr_b) {
  std::string out;
  out.reserve(tmpl.size() + expr_a.size() + expr_b.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 2, "{{") == 0) {
      out.push_back('{');
      i += 2;
    } else if (tmpl.compare(i, 2, "}}") == 0) {
      out.push_back('}');
      i += 2;
    } else if (tmpl.compare(i, 8, "{expr_a}") == 0) {
      out.append(expr_a);
      i += 8;
    } else if (tmpl.compare(i, 8, "{expr_b}") == 0) {
      out.append(expr_b);
      i += 8;
    } else {
      out.push_back(tmpl[i]);
      ++i;
    }
  }
  return out;
}

/// The problem + candidate-solution block fed to the refiner; also used as
/// the context of refiner preference records so they train as
/// prompt -> completion pairs.
inline std::string refiner_input(std::string_view question, std::string_view candidate_solution) {
  std::string out = "Problem:\n";
  out.append(question);
  out.append("\n\nCandidate Solution:\n");
  out.append(candidate_solution);
  return out;
}

inline std::string compose_solver_prompt(std::string_view tmpl, std::string_view question) {
  std::string out(tmpl);
  out.push_back('\n');
  out.append(question);
  return out;
}

inline std::string compose_refiner_prompt(std::string_view tmpl, std::string_view question,
                                          std::string_view candidate_solution) {
  std::string out(tmpl);
  out.push_back('\n');
  out.append(refiner_input(question, candidate_solution));
  return out;
}

}  // namespace aero::prompts
