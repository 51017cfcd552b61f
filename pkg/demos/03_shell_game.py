"""Catching a shell-game dealer who hides no ball.

With at least one ball under the three cups, the chance of picking an empty
cup summed over cups is at most 2. Simulate honest, cheating and partially
cheating dealers and run the finite-sample test on each trial log.
"""

from tsirelson.shellgame import DealerStrategy, cheat_test, estimate, simulate

strategies = {
    "honest, one ball": DealerStrategy("honest_uniform", balls=1),
    "honest, two balls": DealerStrategy("honest_uniform", balls=2),
    "removes the ball": DealerStrategy("cheat_remove"),
    "removes it 40% of rounds": DealerStrategy("mixed", balls=1, cheat_prob=0.4),
}

for rounds in (60, 300, 3000):
    print(f"\n{rounds} rounds, confidence 0.99")
    for name, strategy in strategies.items():
        cond, counts = estimate(simulate(strategy, rounds, seed=1))
        rep = cheat_test(cond, counts, confidence=0.99, seed=1)
        print(f"  {name:<26} S={rep.statistic:.3f}  margin={sum(rep.epsilon):.3f}  {rep.verdict}")
