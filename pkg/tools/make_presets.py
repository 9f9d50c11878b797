"""Regenerate the bundled preset configs (run from the repo root)."""
from pathlib import Path

import yaml

OUT = Path("src/collusionlab/presets")

R1_32B = {"kind": "openai", "endpoint": "http://localhost:8000/v1",
          "model_name": "deepseek-ai/DeepSeek-R1-Distill-Qwen-32B"}
R1_14B = {"kind": "openai", "endpoint": "http://localhost:8001/v1",
          "model_name": "deepseek-ai/DeepSeek-R1-Distill-Qwen-14B"}
GPT5_MINI = {"kind": "openai", "endpoint": "https://api.openai.com/v1", "model_name": "gpt-5-mini",
             "api_key_env": "OPENAI_API_KEY", "temperature": 1.0}


def llm(delta=0.95, backend=R1_32B, **kw):
    return {"kind": "llm", "delta": delta, "backend": dict(backend), **kw}


def doc(name, agents, comment, **kw):
    return name, comment, {"name": name, "market": {"n": len(agents)}, "agents": agents,
                           "runs": 10, "seed": 0, **kw}


def mock(prices_or_segments, delta=0.95, **kw):
    return llm(delta, {"kind": "price_path", "options": {"segments": prices_or_segments,
                                                         "strategy": "Keep prices stable."}}, **kw)


PRESETS = [
    doc("two-patient", [llm(), llm()], "Two patient LLM sellers."),
    doc("two-myopic", [llm(0.0), llm(0.0)], "Two myopic LLM sellers (delta = 0)."),
    doc("patient-vs-myopic", [llm(), llm(0.0)], "Patience heterogeneity."),
    doc("data-asymmetry", [llm(), llm(info_access="own_only")],
        "Seller 1 sees rival prices, seller 2 only its own data."),
    doc("frozen-q", [llm(), {"kind": "qlearning", "mode": "frozen"}],
        "LLM against a pretrained Q-learner that no longer updates."),
    doc("adaptive-q", [llm(), {"kind": "qlearning", "mode": "adaptive"}],
        "LLM against a pretrained Q-learner that keeps learning (clock restarts)."),
    doc("three-sellers", [llm()] * 3, "Three patient LLM sellers."),
    doc("four-sellers", [llm()] * 4, "Four patient LLM sellers."),
    doc("five-sellers", [llm()] * 5, "Five patient LLM sellers."),
    doc("32b-vs-14b", [llm(), llm(backend=R1_14B)], "Model-size heterogeneity."),
    doc("anti-collusion-two-patient", [llm(backend=GPT5_MINI, anti_collusion=True)] * 2,
        "Hosted model with the anti-collusion instruction; needs OPENAI_API_KEY."),
    doc("anti-collusion-two-myopic", [llm(0.0, GPT5_MINI, anti_collusion=True)] * 2,
        "Hosted model with the anti-collusion instruction; needs OPENAI_API_KEY."),
    doc("anti-collusion-patient-vs-myopic",
        [llm(backend=GPT5_MINI, anti_collusion=True), llm(0.0, GPT5_MINI, anti_collusion=True)],
        "Hosted model with the anti-collusion instruction; needs OPENAI_API_KEY."),
    doc("anti-collusion-data-asymmetry",
        [llm(backend=GPT5_MINI, anti_collusion=True),
         llm(backend=GPT5_MINI, anti_collusion=True, info_access="own_only")],
        "Hosted model with the anti-collusion instruction; needs OPENAI_API_KEY."),
    doc("repeated-monopoly", [llm(monopoly=True, label="Monopolist")],
        "One LLM pricing a single product alone for 300 periods.",
        max_periods=300, stop_on_convergence=False, runs=1),
    # offline replicas of representative runs, driven by scripted model replies
    doc("mock-two-patient",
        [mock([[5.0, 1], [[2.5, 2.0], 37], [2.5, 1], [[1.78, 1.80, 1.79, 1.80], 25]]),
         mock([[[1.80, 1.90, 2.00], 7], [1.80, 1], [[1.85, 1.80], 27], [[1.80, 1.79], 50]])],
        "Scripted replay of a representative two-patient run (converges at period 176).", runs=1),
    doc("mock-two-myopic",
        [mock([[[1.9, 1.6], 25], [1.47, 1]], 0.0), mock([[[1.5, 1.8], 25], [1.47, 1]], 0.0)],
        "Scripted myopic pair settling at the competitive price.", runs=1),
    doc("mock-data-asymmetry",
        [mock([[[1.7, 1.5], 31], [1.55, 1]]),
         mock([[[1.9, 1.65], 31], [1.60, 1]], info_access="own_only")],
        "Scripted high-data vs low-data pair settling at 1.55 and 1.60.", runs=1),
    doc("mock-five-sellers",
        [mock([[[1.5 + 0.1 * k, 2.2 - 0.1 * k], 500]]) for k in range(5)],
        "Scripted five-seller market that never satisfies the convergence rule.", runs=1),
]

OUT.mkdir(parents=True, exist_ok=True)
for name, comment, body in PRESETS:
    text = f"# {comment}\n" + yaml.safe_dump(body, sort_keys=False, default_flow_style=None)
    (OUT / f"{name}.yaml").write_text(text, encoding="utf-8")
print(len(PRESETS), "presets written")
