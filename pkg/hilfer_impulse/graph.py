"""
Declarative segment graphs: a solve walks from state to state, each
non-terminal state's check_<name> classmethod doing one segment's work
and naming the state to move to next.
"""

import inspect
import logging
from collections.abc import Callable
from typing import Any, ClassVar

logger = logging.getLogger(__name__)

RESERVED_NAMES = frozenset({"states", "initial_state", "terminal_states", "automatic_states"})


class State:
    """
    One node of a StateGraph. Its name comes from the attribute it is
    assigned to.
    """

    name: str
    graph: type["StateGraph"]

    def __init__(self, force_initial: bool = False):
        self.force_initial = force_initial
        self.parents: set[State] = set()
        self.children: set[State] = set()

    def __set_name__(self, owner: type, name: str):
        self.name = name

    def __repr__(self):
        return f"<State {getattr(self, 'name', '?')}>"

    def __str__(self):
        return self.name

    def __eq__(self, other):
        if isinstance(other, str):
            return self.name == other
        return self is other

    def __hash__(self):
        return id(self)

    def transitions_to(self, other: "State"):
        self.children.add(other)
        other.parents.add(self)

    @property
    def initial(self) -> bool:
        return self.force_initial or not self.parents

    @property
    def terminal(self) -> bool:
        return not self.children

    @property
    def check_name(self) -> str:
        return f"check_{self.name}"

    @property
    def handler(self) -> Callable[[Any], str]:
        """
        The graph's check method for this state; AttributeError if it has none.
        """
        return getattr(self.graph, self.check_name)


class StateGraph:
    """
    Base class for segment graphs. Subclasses declare State attributes,
    wire them with transitions_to, and give every non-terminal state a
    check_<name> classmethod.
    """

    states: ClassVar[dict[str, State]]
    initial_state: ClassVar[State]
    terminal_states: ClassVar[set[State]]
    automatic_states: ClassVar[set[State]]

    def __init_subclass__(cls) -> None:
        super().__init_subclass__()
        cls.states = {}
        for name, value in vars(cls).items():
            if not isinstance(value, State):
                continue
            if name in RESERVED_NAMES:
                raise ValueError(f"Cannot name a state {name} - this is reserved")
            value.graph = cls
            cls.states[name] = value
        initials = [state for state in cls.states.values() if state.initial]
        if len(initials) != 1:
            raise ValueError(f"{cls.__name__} needs exactly one initial state, found {initials}")
        cls.initial_state = initials[0]
        cls.terminal_states = {state for state in cls.states.values() if state.terminal}
        cls.automatic_states = set(cls.states.values()) - cls.terminal_states
        for state in cls.states.values():
            has_check = hasattr(cls, state.check_name)
            if state.terminal and has_check:
                raise ValueError(f"Terminal state {state} should not have {state.check_name}")
            if not state.terminal:
                if not has_check:
                    raise ValueError(f"State {state} does not have a {state.check_name} method")
                if not inspect.ismethod(state.handler):
                    raise ValueError(f"{cls.__name__}.{state.check_name} is not a classmethod")

    @classmethod
    def run_to_completion(cls, subject: Any) -> State:
        """
        Calls each state's handler with `subject`, following the state
        names they return, until a terminal state is reached.
        """
        state = cls.initial_state
        while not state.terminal:
            result = state.handler(subject)
            next_state = cls.states.get(str(result))
            if next_state is None:
                raise ValueError(f"{state} handler returned unknown state {result!r}")
            if next_state not in state.children:
                raise ValueError(
                    f"Cannot transition from {state} to {next_state} - not a declared transition"
                )
            logger.debug(f"{cls.__name__}: {state} -> {next_state}")
            state = next_state
        return state
