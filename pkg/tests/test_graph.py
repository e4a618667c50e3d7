import pytest

from hilfer_impulse.graph import State, StateGraph
from hilfer_impulse.solver import InstantaneousSegments, NonInstantaneousSegments


class Walk:
    def __init__(self, script):
        self.script = list(script)
        self.visited = []


class WalkStates(StateGraph):
    start = State()
    middle = State()
    done = State()

    start.transitions_to(middle)
    middle.transitions_to(middle)
    middle.transitions_to(done)

    @classmethod
    def check_start(cls, walk):
        walk.visited.append("start")
        return cls.middle

    @classmethod
    def check_middle(cls, walk):
        walk.visited.append("middle")
        return walk.script.pop(0)


def test_declare():
    """
    Tests a basic graph declaration and various kinds of handler
    lookups.
    """

    class TestGraph(StateGraph):
        initial = State()
        second = State()
        third = State()
        fourth = State()
        final = State()

        initial.transitions_to(second)
        initial.transitions_to(third)
        second.transitions_to(final)
        third.transitions_to(fourth)
        fourth.transitions_to(final)

        @classmethod
        def check_initial(cls):
            pass

        @classmethod
        def check_second(cls):
            pass

        @classmethod
        def check_third(cls):
            pass

        @classmethod
        def check_fourth(cls):
            pass

    assert TestGraph.initial_state == TestGraph.initial
    assert TestGraph.terminal_states == {TestGraph.final}
    assert TestGraph.automatic_states == {
        TestGraph.initial,
        TestGraph.second,
        TestGraph.third,
        TestGraph.fourth,
    }


def test_bad_declarations():
    """
    Tests that you can't declare an invalid graph.
    """
    # More than one initial state
    with pytest.raises(ValueError):

        class TestGraph2(StateGraph):
            initial = State()
            initial2 = State()

    # Non-terminal state without a check method
    with pytest.raises(ValueError):

        class TestGraph3(StateGraph):
            initial = State()
            second = State()

            initial.transitions_to(second)

    # Terminal state with a check method
    with pytest.raises(ValueError):

        class TestGraph4(StateGraph):
            initial = State()
            final = State()

            initial.transitions_to(final)

            @classmethod
            def check_initial(cls):
                pass

            @classmethod
            def check_final(cls):
                pass

    # Reserved names
    with pytest.raises(ValueError):

        class TestGraph5(StateGraph):
            terminal_states = State()


def test_run_to_completion():
    walk = Walk(["middle", "middle", "done"])
    assert WalkStates.run_to_completion(walk) == WalkStates.done
    assert walk.visited == ["start", "middle", "middle", "middle"]


def test_run_rejects_bad_transitions():
    with pytest.raises(ValueError, match="unknown state"):
        WalkStates.run_to_completion(Walk(["nowhere"]))
    with pytest.raises(ValueError, match="not a declared transition"):
        WalkStates.run_to_completion(Walk(["start"]))


@pytest.mark.parametrize(
    "graph,impulse",
    [(NonInstantaneousSegments, "impulse_window"), (InstantaneousSegments, "point_impulse")],
)
def test_segment_graphs(graph, impulse):
    assert graph.initial_state == graph.active
    assert graph.terminal_states == {graph.finished}
    assert graph.states[impulse] in graph.active.children
    assert graph.active in graph.states[impulse].children
