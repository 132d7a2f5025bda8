import pytest

from worksim.compose import compose
from worksim.tasks import get_rule


@pytest.fixture
def meeting_scenario():
    """One meeting + two normal tasks, no reveal dependency."""
    rules = [get_rule("meeting_attendance"), get_rule("contact_lookup"), get_rule("report_drafting")]
    return compose(rules, 7001, dependency_probability=0.0, at_time_probability=0.0)


@pytest.fixture
def ads_scenario():
    return compose([get_rule("advertising_campaign")], 510, dependency_probability=0.0, at_time_probability=0.0)


@pytest.fixture
def basic_scenario():
    return compose([get_rule("transaction_auditing")], 99, dependency_probability=0.0, at_time_probability=0.0)
